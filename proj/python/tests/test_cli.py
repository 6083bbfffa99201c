import json
import re
import subprocess

import pytest

# Flags each command must document; the help doc test checks every one has text.
FLAGS = {
    "generate": ["--kind", "--n", "--m", "--communities", "--intra-p", "--inter-p", "--bridges", "--seed",
                 "--connected", "--spec", "--truth", "--out"],
    "metrics": ["--dataset", "--data-dir", "--seed", "--normalized", "--communities", "--out"],
    "embed": ["--dataset", "--data-dir", "--model", "--p", "--q", "--dim", "--walks", "--length", "--window",
              "--epochs", "--negatives", "--lr", "--workers", "--layers", "--stay", "--seed", "--out"],
    "regress": ["--dataset", "--data-dir", "--embeddings", "--metrics-seed", "--seed", "--train-fraction",
                "--max-depth", "--min-leaf", "--lambda", "--r2-gate", "--max-pairs", "--table", "--out"],
    "project": ["--dataset", "--data-dir", "--space", "--perplexity", "--iterations", "--learning-rate", "--stride",
                "--seed", "--metrics-seed", "--snapshots", "--out"],
    "structure": ["--dataset", "--data-dir", "--embedding", "--k", "--seed", "--out"],
    "rank": ["--dataset", "--data-dir", "--anchor", "--space", "--measure", "--k", "--order-by", "--compare",
             "--seed", "--out"],
    "serve": ["--data-dir", "--host", "--port", "--workers"],
    "pipeline run": ["--output"],
}

OPTION = re.compile(r"^\s+(?:-\w,)?(--[\w-]+)(.*)$")


def run(cli, *args, check=None):
    p = subprocess.run([cli, *map(str, args)], capture_output=True, text=True, timeout=600)
    if check is not None:
        assert p.returncode == check, (args, p.returncode, p.stderr)
    return p


def documented(help_text):
    """flag -> description, following CLI11's wrap onto the next line."""
    out = {}
    lines = help_text.splitlines()
    for i, line in enumerate(lines):
        m = OPTION.match(line)
        if not m:
            continue
        rest = re.sub(r"^\s*(?:[A-Z]+(?::\{[^}]*\})?(?: REQUIRED)?(?: \[[^\]]*\])?)?", "", m.group(2)).strip()
        if not rest and i + 1 < len(lines) and not OPTION.match(lines[i + 1]):
            rest = lines[i + 1].strip()
        out[m.group(1)] = rest
    return out


@pytest.mark.parametrize("command", sorted(FLAGS))
def test_help_documents_every_flag(cli, command):
    p = run(cli, *command.split(), "--help", check=0)
    docs = documented(p.stdout)
    for flag in FLAGS[command]:
        assert flag in docs, f"{command} {flag} missing from help"
        assert docs[flag], f"{command} {flag} has no description"
    extra = set(docs) - set(FLAGS[command]) - {"--help", "--help-all"}
    assert not extra, f"{command} flags not covered by this test: {extra}"


def test_top_level_help_lists_commands(cli):
    out = run(cli, "--help", check=0).stdout
    for command in ["generate", "metrics", "embed", "regress", "project", "structure", "rank", "serve", "pipeline"]:
        assert re.search(rf"^\s+{command}\s+\S", out, re.M), command


@pytest.fixture(scope="module")
def graph(cli, tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    path = d / "ba.edges"
    run(cli, "generate", "--kind", "barabasi_albert", "--n", 80, "--m", 2, "--seed", 7, "--out", path, check=0)
    return path


def embed_args(graph, model, out, *extra):
    return ["embed", "-d", graph, "-m", model, "--walks", 4, "--length", 20, "--dim", 16, "--workers", 1,
            "--seed", 3, "--out", out, *extra]


def test_exit_codes(cli, graph, tmp_path):
    p = run(cli, *embed_args(graph, "node2vec", tmp_path / "e.txt"), check=2)
    assert "p" in p.stderr
    assert p.stdout == ""
    run(cli, "embed", "--bogus", check=2)
    run(cli, "metrics", "-d", tmp_path / "missing.edges", check=4)
    run(cli, "rank", "-d", graph, "--anchor", "nobody", check=4)
    # two blocks with no inter edges cannot be connected
    run(cli, "generate", "--kind", "planted_partition", "--n", 20, "--communities", 2, "--intra-p", 0.5,
        "--inter-p", 0, "--connected", check=3)


def test_regress_report_validates(cli, graph, tmp_path, validate):
    a, b = tmp_path / "deepwalk.txt", tmp_path / "struc2vec.txt"
    run(cli, *embed_args(graph, "deepwalk", a), check=0)
    run(cli, *embed_args(graph, "struc2vec", b), check=0)
    report = json.loads(run(cli, "regress", "-d", graph, "-e", a, "-e", b, "--max-pairs", 400, check=0).stdout)
    validate("regression-report", report)
    trees = [r for r in report["reports"] if r["regressor"] == "decision_tree"]
    # model ids come from the embedding file names
    assert [r["model_id"] for r in trees] == ["deepwalk", "struc2vec"]


def test_label_mismatch_lists_missing_labels(cli, graph, tmp_path):
    emb = tmp_path / "e.txt"
    run(cli, *embed_args(graph, "deepwalk", emb), check=0)
    lines = emb.read_text().splitlines()
    n, d = map(int, lines[0].split())
    dropped = [l.split()[0] for l in lines[1:3]]
    emb.write_text("\n".join([f"{n - 2} {d}"] + lines[3:]) + "\n")
    p = run(cli, "regress", "-d", graph, "-e", emb, "--max-pairs", 200, check=4)
    for label in dropped:
        assert label in p.stderr


def test_embedding_file_format(cli, graph, tmp_path):
    emb = tmp_path / "e.txt"
    run(cli, *embed_args(graph, "deepwalk", emb), check=0)
    lines = emb.read_text().splitlines()
    assert lines[0] == "80 16"
    assert len(lines) == 81
    assert all(len(l.split()) == 17 for l in lines[1:])


def outputs(cli, graph, work):
    """Runs every command once into `work`; returns the produced bytes by name."""
    work.mkdir()
    emb = work / "deepwalk.txt"
    s2v = work / "struc2vec.txt"
    run(cli, "generate", "--kind", "planted_partition", "--n", 60, "--communities", 3, "--intra-p", 0.3,
        "--inter-p", 0.01, "--bridges", 2, "--seed", 9, "--out", work / "pp.edges", check=0)
    run(cli, "metrics", "-d", graph, "--seed", 2, "--out", work / "metrics.csv", check=0)
    run(cli, *embed_args(graph, "deepwalk", emb), check=0)
    run(cli, *embed_args(graph, "node2vec", work / "n2v.txt", "--p", 256, "--q", 0.004), check=0)
    run(cli, *embed_args(graph, "struc2vec", s2v), check=0)
    run(cli, "regress", "-d", graph, "-e", emb, "-e", s2v, "--max-pairs", 600, "--seed", 4,
        "--out", work / "report.json", "--table", work / "table.csv", check=0)
    run(cli, "project", "-d", graph, "--space", emb, "--iterations", 150, "--seed", 5, "--out",
        work / "projection.json", check=0)
    run(cli, "structure", "-d", graph, "-e", s2v, "--k", 3, "--seed", 6, "--out", work / "structure.json", check=0)
    run(cli, "rank", "-d", graph, "--anchor", 20, "--space", emb, "--measure", "euclidean", "--k", 10,
        "--out", work / "rank.json", check=0)
    stdout = run(cli, "rank", "-d", graph, "--anchor", 20, "--space", emb, "--k", 10, check=0).stdout
    (work / "rank.stdout").write_text(stdout)
    return {p.name: p.read_bytes() for p in sorted(work.iterdir()) if p.is_file()}


def test_every_command_is_byte_reproducible(cli, graph, tmp_path):
    first = outputs(cli, graph, tmp_path / "a")
    second = outputs(cli, graph, tmp_path / "b")
    assert sorted(first) == sorted(second)
    for name in first:
        assert first[name] == second[name], name
    assert len(first) >= 11


def test_machine_readable_outputs(cli, graph, tmp_path):
    emb = tmp_path / "e.txt"
    run(cli, *embed_args(graph, "deepwalk", emb), check=0)
    rank = json.loads(run(cli, "rank", "-d", graph, "--anchor", 20, "--space", emb, "--k", 50, check=0).stdout)
    assert len(rank["entries"]) == 50
    assert "ndcg" in rank
    metrics = run(cli, "metrics", "-d", graph, check=0).stdout.splitlines()
    assert metrics[0].startswith("label,degree,")
    assert len(metrics) == 81


def test_structure_finds_three_clusters_on_planted_graph(cli, tmp_path):
    g = tmp_path / "pp.edges"
    run(cli, "generate", "--kind", "planted_partition", "--n", 90, "--communities", 3, "--intra-p", 0.3,
        "--inter-p", 0.01, "--bridges", 2, "--seed", 1, "--connected", "--out", g, check=0)
    emb = tmp_path / "e.txt"
    run(cli, *embed_args(g, "struc2vec", emb), check=0)
    out = json.loads(run(cli, "structure", "-d", g, "-e", emb, "--k", 3, check=0).stdout)
    assert len(out["clusters"]) == 3
    assert sum(len(c["members"]) for c in out["clusters"]) == 90


def test_serve_prints_port_and_ready(cli, tmp_path):
    p = subprocess.Popen([cli, "serve", "--data-dir", tmp_path, "--port", "0"], stdout=subprocess.PIPE,
                         stderr=subprocess.PIPE, text=True)
    try:
        port = p.stdout.readline().strip()
        assert re.fullmatch(r"port=\d+", port)
        assert int(port.split("=")[1]) > 0
        assert p.stdout.readline().strip() == "ready"
    finally:
        p.terminate()
        assert p.wait(timeout=30) == 0


def test_pipeline_run(cli, tmp_path, validate):
    config = tmp_path / "pipeline.yaml"
    config.write_text(f"""\
synthetic:
  kind: barabasi_albert
  n: 70
  ba_m: 2
  seed: 3
data_dir: {tmp_path / 'data'}
output: {tmp_path / 'out'}
walk:
  walks_per_node: 3
  walk_length: 15
  dimension: 8
  workers: 1
models:
  - model: deepwalk
  - model: node2vec
    p: 1
    q: 1
  - model: struc2vec
regression:
  max_pairs: 500
structure:
  k: 3
projection:
  spaces: [graph, struc2vec]
  iterations: 120
""")
    p = run(cli, "pipeline", "run", config, check=0)
    out = tmp_path / "out"
    for name in ["metrics.csv", "communities.csv", "embeddings/deepwalk.txt", "embeddings/node2vec_p1_q1.txt",
                 "embeddings/struc2vec.txt", "regression.json", "table1.csv", "structure/struc2vec.json",
                 "projection/graph.json", "projection/struc2vec.json"]:
        assert (out / name).is_file(), name
    assert p.stdout.startswith("metric,")
    report = validate("regression-report", json.loads((out / "regression.json").read_text()))
    assert [r["model_id"] for r in report["reports"] if r["regressor"] == "decision_tree"] == [
        "deepwalk", "node2vec_p1_q1", "struc2vec"]

    first = (out / "embeddings/struc2vec.txt").read_bytes()
    run(cli, "pipeline", "run", config, "--output", tmp_path / "again", check=0)
    assert (tmp_path / "again/embeddings/struc2vec.txt").read_bytes() == first

    bad = tmp_path / "bad.yaml"
    bad.write_text(config.read_text().replace("regression:", "regresion:"))
    p = run(cli, "pipeline", "run", bad, check=2)
    assert "regresion" in p.stderr
    run(cli, "pipeline", "run", tmp_path / "missing.yaml", check=4)
