#pragma once

#include "embcmp/error.hpp"
#include "embcmp/graph.hpp"
#include "embcmp/matrix.hpp"
#include "embcmp/struc2vec.hpp"
#include "embcmp/walks.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace embcmp {

using EmbeddingVectors = DenseMatrix<float>;

/// Node vectors aligned to a graph's node indices.
struct EmbeddingMatrix {
    std::string model_id;
    std::string config_hash;
    EmbeddingVectors vectors;
};

struct SkipgramResult {
    EmbeddingVectors vectors;
    /// Mean negative-sampling loss per positive pair, one entry per epoch.
    std::vector<double> epoch_loss;
};

/// Skip-gram with negative sampling over a walk corpus. Noise distribution
/// is unigram^0.75, learning rate decays linearly to 5% of the initial
/// value, windows are shrunk uniformly at random as in word2vec. With one
/// worker the result is a pure function of (corpus, cfg). When
/// `output_vectors` is given it receives the trained context vectors.
SkipgramResult train_skipgram(const WalkCorpus& corpus, std::size_t vocab_size,
                              const WalkConfig& cfg, EmbeddingVectors* output_vectors = nullptr);

/// Mean SGNS loss of (center, context) pairs against fixed negatives,
/// evaluated with input vectors `in` and output vectors `out`.
double sgns_loss(const EmbeddingVectors& in, const EmbeddingVectors& out,
                 std::span<const std::pair<NodeId, NodeId>> pairs,
                 std::span<const std::vector<NodeId>> negatives);

enum class ModelKind { deepwalk, node2vec, struc2vec };

ModelKind parse_model(const std::string& name);
std::string model_name(ModelKind kind);

struct EmbedRequest {
    ModelKind model = ModelKind::deepwalk;
    WalkConfig walk;
    std::optional<Node2vecParams> node2vec;
    Struc2vecConfig struc2vec;

    /// Throws InvalidArgument when node2vec params are missing for node2vec
    /// or supplied for another model.
    void validate() const;
};

/// Space identifier: "deepwalk", "struc2vec", or "node2vec_p<p>_q<q>".
std::string space_id(const EmbedRequest& request);

/// Hex digest over the graph fingerprint and every request field.
std::string config_hash(const Graph& g, const EmbedRequest& request);

WalkCorpus generate_walks(const Graph& g, const EmbedRequest& request);

/// generate_walks followed by train_skipgram.
EmbeddingMatrix embed(const Graph& g, const EmbedRequest& request);

// word2vec text format: "<N> <d>" then "<label> v1 ... vd", 9 significant digits.

struct LabeledEmbedding {
    std::vector<std::string> labels;
    EmbeddingVectors vectors;
};

void write_embedding(std::ostream& out, const std::vector<std::string>& labels,
                     const EmbeddingVectors& vectors);
void write_embedding(std::ostream& out, const Graph& g, const EmbeddingMatrix& e);
void save_embedding(const std::string& path, const Graph& g, const EmbeddingMatrix& e);

LabeledEmbedding read_embedding(std::istream& in);
LabeledEmbedding load_embedding(const std::string& path);

/// Graph labels missing from an embedding file.
struct LabelMismatch : DataError {
    LabelMismatch(std::vector<std::string> missing_labels);
    std::vector<std::string> missing;
};

/// Reorders rows to graph node order. Extra labels are ignored.
EmbeddingMatrix align_embedding(const Graph& g, const LabeledEmbedding& e,
                                std::string model_id = "external");

} // namespace embcmp
