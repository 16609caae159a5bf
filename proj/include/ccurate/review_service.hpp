#pragma once

#include "ccurate/registry.hpp"

#include <map>
#include <memory>
#include <string>

namespace ccurate {

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Routes of the review API, independent of any HTTP library:
///
///   GET  /collections
///   GET  /collections/{id}
///   GET  /collections/{id}/buckets?dimension=NAME
///   GET  /collections/{id}/thresholds
///   PUT  /collections/{id}/thresholds
///   GET  /domains/queue
///   GET  /domains/{domain}
///   POST /domains/{domain}/verdict   {"status", "note", "reviewer"}
///   GET  /domains/allowlist          (JSONL)
///
/// Errors come back as {"error": message} with 400, 401, 404 or 409.
class ReviewService {
public:
    /// An empty token disables authentication.
    explicit ReviewService(Registry& registry, std::string token = {});

    HttpResponse handle(const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query, const std::string& body,
                        const std::string& authorization = {}) const;

private:
    HttpResponse route(const std::string& method, const std::string& path,
                       const std::map<std::string, std::string>& query, const std::string& body) const;

    Registry& registry_;
    std::string token_;
};

/// Serves a ReviewService over HTTP on a background thread.
class ReviewServer {
public:
    explicit ReviewServer(ReviewService& service);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds (port 0 picks a free port) and returns the bound port.
    int start(const std::string& host, int port);
    /// Blocks until stop() is called from another thread or a signal.
    void listen(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace ccurate
