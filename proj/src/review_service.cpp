#include "ccurate/review_service.hpp"

#include "ccurate/error.hpp"

#include <httplib.h>

#include <sstream>
#include <thread>

namespace ccurate {
namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto slash = path.find('/', start);
        const auto end = slash == std::string::npos ? path.size() : slash;
        if (end > start) {
            parts.push_back(path.substr(start, end - start));
        }
        if (slash == std::string::npos) {
            break;
        }
        start = slash + 1;
    }
    return parts;
}

HttpResponse json_response(int status, const nlohmann::json& j) { return {status, j.dump(), "application/json"}; }

HttpResponse error(int status, const std::string& message) {
    return json_response(status, nlohmann::json{{"error", message}});
}

nlohmann::json collection_json(const CollectionRecord& record, const std::optional<RiskRecord>& risk) {
    nlohmann::json j = record;
    j["risk"] = risk ? nlohmann::json(*risk) : nlohmann::json(nullptr);
    return j;
}

} // namespace

ReviewService::ReviewService(Registry& registry, std::string token)
    : registry_(registry), token_(std::move(token)) {}

HttpResponse ReviewService::handle(const std::string& method, const std::string& path,
                                   const std::map<std::string, std::string>& query, const std::string& body,
                                   const std::string& authorization) const {
    if (!token_.empty() && authorization != "Bearer " + token_) {
        return error(401, "missing or invalid bearer token");
    }
    try {
        return route(method, path, query, body);
    } catch (const NotFoundError& e) {
        return error(404, e.what());
    } catch (const ConflictError& e) {
        return error(409, e.what());
    } catch (const ConfigError& e) {
        return error(400, e.what());
    } catch (const FormatError& e) {
        return error(400, e.what());
    } catch (const nlohmann::json::exception& e) {
        return error(400, std::string("invalid JSON: ") + e.what());
    } catch (const std::exception& e) {
        return error(500, e.what());
    }
}

HttpResponse ReviewService::route(const std::string& method, const std::string& path,
                                  const std::map<std::string, std::string>& query, const std::string& body) const {
    const auto parts = split_path(path);
    if (parts.empty()) {
        return error(404, "no such endpoint");
    }
    if (parts[0] == "collections") {
        if (parts.size() == 1 && method == "GET") {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& c : registry_.collections()) {
                out.push_back(collection_json(c, registry_.risk(c.collection_id)));
            }
            return json_response(200, out);
        }
        const std::string& id = parts.size() > 1 ? parts[1] : std::string{};
        if (parts.size() == 2 && method == "GET") {
            auto c = registry_.collection(id);
            if (!c) {
                throw NotFoundError("unknown collection: " + id);
            }
            return json_response(200, collection_json(*c, registry_.risk(id)));
        }
        if (parts.size() == 3 && parts[2] == "buckets" && method == "GET") {
            auto dim = query.find("dimension");
            if (dim == query.end() || dim->second.empty()) {
                return error(400, "missing dimension parameter");
            }
            auto report = registry_.bucket_report(id, dim->second);
            if (!report) {
                throw NotFoundError("no bucket report for " + id + "/" + dim->second);
            }
            return json_response(200, *report);
        }
        if (parts.size() == 3 && parts[2] == "thresholds") {
            if (method == "GET") {
                return json_response(200, registry_.thresholds(id));
            }
            if (method == "PUT") {
                auto j = nlohmann::json::parse(body);
                if (!j.contains("collection_id")) {
                    j["collection_id"] = id;
                }
                auto cfg = j.get<ThresholdConfig>();
                if (cfg.collection_id != id) {
                    return error(400, "collection_id in body does not match the path");
                }
                return json_response(200, registry_.put_thresholds(std::move(cfg)));
            }
        }
    } else if (parts[0] == "domains") {
        if (parts.size() == 2 && parts[1] == "queue" && method == "GET") {
            return json_response(200, registry_.queue());
        }
        if (parts.size() == 2 && parts[1] == "allowlist" && method == "GET") {
            std::ostringstream out;
            registry_.export_allowlist(out);
            return {200, out.str(), "application/x-ndjson"};
        }
        if (parts.size() == 2 && method == "GET") {
            auto entry = registry_.domain(parts[1]);
            if (!entry) {
                throw NotFoundError("unknown domain: " + parts[1]);
            }
            return json_response(200, *entry);
        }
        if (parts.size() == 3 && parts[2] == "verdict" && method == "POST") {
            const auto j = nlohmann::json::parse(body);
            auto entry = registry_.record_verdict(parts[1], j.at("status").get<std::string>(),
                                                  j.value("note", std::string{}), j.value("reviewer", std::string{}));
            return json_response(201, entry);
        }
    }
    return error(404, "no such endpoint: " + method + " " + path);
}

struct ReviewServer::Impl {
    explicit Impl(ReviewService& s) : service(s) {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            std::map<std::string, std::string> query;
            for (const auto& [k, v] : req.params) {
                query.emplace(k, v);
            }
            const auto r = service.handle(req.method, req.path, query, req.body,
                                          req.get_header_value("Authorization"));
            res.status = r.status;
            res.set_content(r.body, r.content_type.c_str());
        };
        server.Get(".*", handler);
        server.Put(".*", handler);
        server.Post(".*", handler);
        server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type, Authorization"},
                                    {"Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS"}});
    }

    ReviewService& service;
    httplib::Server server;
    std::thread thread;
};

ReviewServer::ReviewServer(ReviewService& service) : impl_(std::make_unique<Impl>(service)) {}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host.c_str());
    } else if (!impl_->server.bind_to_port(host.c_str(), port)) {
        bound = -1;
    }
    if (bound < 0) {
        throw Error("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void ReviewServer::listen(const std::string& host, int port) {
    if (!impl_->server.listen(host.c_str(), port)) {
        throw Error("cannot listen on " + host + ":" + std::to_string(port));
    }
}

void ReviewServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

} // namespace ccurate
