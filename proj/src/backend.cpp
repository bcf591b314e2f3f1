#include "icqd/backend.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <semaphore>
#include <string_view>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace icqd {

// ------------------------------------------------------------- oracle

namespace {

struct OracleLine {
    std::optional<int> fitness;
    std::vector<int> features;  // empty when the template carries none
    std::vector<int> params;
};

void trim(std::string_view& s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
}

std::vector<int> parse_int_list(std::string_view text, const std::string& what) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = text.find(',', pos);
        std::string_view token = text.substr(
            pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        trim(token);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
            throw std::runtime_error("scripted oracle: bad integer in " + what + ": \"" +
                                     std::string(text) + "\"");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t at = text.find(sep, pos);
        if (at == std::string_view::npos) {
            out.push_back(text.substr(pos));
            return out;
        }
        out.push_back(text.substr(pos, at - pos));
        pos = at + 1;
    }
}

OracleLine parse_context_line(std::string_view line) {
    const std::vector<std::string_view> segs = split(line, ':');
    OracleLine out;
    switch (segs.size()) {
        case 1:  // params only
            out.params = parse_int_list(segs[0], "context line");
            return out;
        case 2: {
            // one prefix segment: a single value means fitness, a list means
            // features (unambiguous for the 2-d feature spaces used here)
            const std::vector<int> head = parse_int_list(segs[0], "context line");
            if (head.size() == 1)
                out.fitness = head[0];
            else
                out.features = head;
            out.params = parse_int_list(segs[1], "context line");
            return out;
        }
        case 3:
            out.fitness = parse_int_list(segs[0], "context line").at(0);
            out.features = parse_int_list(segs[1], "context line");
            out.params = parse_int_list(segs[2], "context line");
            return out;
        default:
            throw std::runtime_error("scripted oracle: unrecognized context line: \"" +
                                     std::string(line) + "\"");
    }
}

std::string format_params(const std::vector<long long>& params) {
    std::string out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(params[i]);
    }
    return out;
}

}  // namespace

ScriptedOracle::ScriptedOracle(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("ScriptedOracle: k must be >= 1");
}

std::string ScriptedOracle::complete(const CompletionRequest& request) {
    const std::vector<std::string_view> lines = split(request.prompt, '\n');
    if (lines.size() < 2)
        throw std::runtime_error("scripted oracle: prompt has no context/query split");

    // everything before the last newline is context; the remainder is the
    // query line (empty for the params-only template)
    std::vector<OracleLine> context;
    context.reserve(lines.size() - 1);
    for (std::size_t i = 0; i + 1 < lines.size(); ++i)
        context.push_back(parse_context_line(lines[i]));
    const std::size_t dim = context.front().params.size();
    for (const OracleLine& line : context)
        if (line.params.size() != dim)
            throw std::runtime_error("scripted oracle: ragged parameter counts in context");

    std::string_view query = lines.back();

    // distance of each context line from the query, in encoded-integer space
    std::vector<double> dist(context.size(), 0.0);
    bool weighted = true;
    if (query.empty()) {
        // no query: average over the whole context
        weighted = false;
    } else {
        std::vector<std::string_view> segs = split(query, ':');
        // the query line ends with ": ", so the last segment is blank
        if (segs.size() < 2 || (!segs.back().empty() && segs.back() != " "))
            throw std::runtime_error("scripted oracle: malformed query line: \"" +
                                     std::string(query) + "\"");
        segs.pop_back();
        const std::vector<int> tail = parse_int_list(segs.back(), "query line");
        // two query segments means fitness+features and the tail is the
        // feature part; with one segment, a list is features and a single
        // value is read off the context line shape
        const bool features_queried =
            segs.size() >= 2 || tail.size() >= 2 ||
            (!context.front().fitness.has_value() && !context.front().features.empty());
        if (features_queried) {
            for (std::size_t i = 0; i < context.size(); ++i) {
                const std::vector<int>& f = context[i].features;
                if (f.size() != tail.size())
                    throw std::runtime_error(
                        "scripted oracle: query/context feature arity mismatch");
                double d2 = 0.0;
                for (std::size_t a = 0; a < f.size(); ++a) {
                    const double d = static_cast<double>(f[a] - tail[a]);
                    d2 += d * d;
                }
                dist[i] = std::sqrt(d2);
            }
        } else {
            // fitness query
            for (std::size_t i = 0; i < context.size(); ++i) {
                if (!context[i].fitness)
                    throw std::runtime_error(
                        "scripted oracle: fitness query over fitness-free context");
                dist[i] = std::abs(static_cast<double>(*context[i].fitness - tail[0]));
            }
        }
    }

    std::vector<std::size_t> order(context.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<long long> result(dim, 0);
    if (!weighted) {
        // uniform average of all context lines, rounded half-up
        for (std::size_t j = 0; j < dim; ++j) {
            double sum = 0.0;
            for (const OracleLine& line : context) sum += line.params[j];
            result[j] = static_cast<long long>(
                std::floor(sum / static_cast<double>(context.size()) + 0.5));
        }
        return format_params(result);
    }

    // k nearest, ties toward earlier context lines
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), order.size());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    order.resize(k);

    // an exact feature match wins outright
    if (dist[order.front()] == 0.0) {
        const std::vector<int>& p = context[order.front()].params;
        return format_params(std::vector<long long>(p.begin(), p.end()));
    }

    double wsum = 0.0;
    for (std::size_t i : order) wsum += 1.0 / dist[i];
    for (std::size_t j = 0; j < dim; ++j) {
        double v = 0.0;
        for (std::size_t i : order) v += (1.0 / dist[i]) * context[i].params[j];
        result[j] = static_cast<long long>(std::floor(v / wsum + 0.5));
    }
    return format_params(result);
}

// ------------------------------------------------------- remote client

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop) {
    std::size_t cut = std::string::npos;
    for (const std::string& s : stop) {
        if (s.empty()) continue;
        const std::size_t at = text.find(s);
        if (at != std::string::npos) cut = std::min(cut, at);
    }
    if (cut != std::string::npos) text.resize(cut);
    return text;
}

namespace {

// base_url -> (scheme://host[:port], path prefix)
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos)
        throw std::invalid_argument("remote backend: base_url needs a scheme: " + base_url);
    const std::size_t path = base_url.find('/', scheme + 3);
    if (path == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path), prefix};
}

}  // namespace

struct RemoteCompletionClient::Impl {
    RemoteConfig config;
    std::string origin;       // scheme://host:port
    std::string path;         // <prefix>/completions
    std::string auth_header;  // empty when no token is configured
    std::counting_semaphore<> in_flight;

    explicit Impl(RemoteConfig cfg)
        : config(std::move(cfg)), in_flight(std::max(1, config.max_concurrency)) {
        auto [o, prefix] = split_base_url(config.base_url);
        origin = std::move(o);
        path = prefix + "/completions";
        if (!config.auth_env.empty()) {
            if (const char* token = std::getenv(config.auth_env.c_str());
                token != nullptr && *token != '\0')
                auth_header = std::string("Bearer ") + token;
        }
    }
};

RemoteCompletionClient::RemoteCompletionClient(RemoteConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteCompletionClient::~RemoteCompletionClient() = default;

std::string RemoteCompletionClient::complete(const CompletionRequest& request) {
    nlohmann::json body;
    body["model"] = impl_->config.model;
    body["prompt"] = request.prompt;  // byte-exact, never reformatted
    body["max_tokens"] = request.max_new_tokens;
    body["temperature"] = request.temperature;
    body["stop"] = request.stop;
    if (request.seed) body["seed"] = *request.seed;
    const std::string payload = body.dump();

    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    std::string last_error;
    for (int attempt = 0; attempt <= impl_->config.retries; ++attempt) {
        if (attempt > 0) {
            const double delay =
                impl_->config.backoff_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }

        // one client per call: httplib clients are not safe for concurrent
        // requests over a shared connection
        httplib::Client client(impl_->origin);
        const auto timeout = std::chrono::duration<double>(impl_->config.timeout_seconds);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        httplib::Headers headers;
        if (!impl_->auth_header.empty())
            headers.emplace("Authorization", impl_->auth_header);

        httplib::Result res = client.Post(impl_->path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError("completion endpoint returned HTTP " +
                               std::to_string(res->status) + ": " + res->body);
        try {
            const nlohmann::json reply = nlohmann::json::parse(res->body);
            std::string text = reply.at("choices").at(0).at("text").get<std::string>();
            return truncate_at_stop(std::move(text), request.stop);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed endpoint response: ") + e.what();
            continue;
        }
    }
    throw BackendError("completion request failed after " +
                       std::to_string(impl_->config.retries + 1) + " attempts; last: " +
                       last_error);
}

}  // namespace icqd
