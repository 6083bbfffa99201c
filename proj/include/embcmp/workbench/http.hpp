#pragma once

#include "embcmp/workbench/workbench.hpp"

#include <memory>
#include <string>

namespace embcmp::workbench {

struct ServiceOptions {
    std::filesystem::path data_dir = "data";
    std::string host = "127.0.0.1";
    int port = 8789;
    std::size_t workers = default_worker_count();
};

/// Reads WORKBENCH_DATA_DIR, WORKBENCH_PORT and WORKBENCH_WORKERS over the
/// defaults. Throws InvalidArgument on malformed values.
ServiceOptions service_options_from_env();

/// JSON over HTTP plus the projection event stream.
class HttpService {
public:
    explicit HttpService(Workbench& workbench);
    ~HttpService();

    /// Binds `host:port` (0 picks a free port) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace embcmp::workbench
