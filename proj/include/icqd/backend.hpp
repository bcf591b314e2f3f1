#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace icqd {

// Sampling knobs shared by every backend call in a run.
struct CompletionSettings {
    int max_new_tokens = 64;
    double temperature = 0.8;
    std::vector<std::string> stop = {"\n"};
};

struct CompletionRequest {
    std::string prompt;
    int max_new_tokens = 64;
    double temperature = 0.8;
    std::vector<std::string> stop = {"\n"};
    std::optional<std::uint64_t> seed;
};

// Transport/endpoint failure after retries; the emitter skips the slot and
// tallies it. Logic errors (bad prompt fed to the oracle) are NOT this type
// and propagate.
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    // must be safe to call from multiple threads at once
    virtual std::string complete(const CompletionRequest& request) = 0;
};

// Deterministic stand-in for a language model: reads the prompt back as
// context + query and answers with the inverse-distance-weighted parameter
// average of the k context solutions nearest to the query. Pure function of
// (prompt, k); every output parses under parse_completion.
class ScriptedOracle final : public CompletionBackend {
public:
    explicit ScriptedOracle(int k = 3);
    std::string complete(const CompletionRequest& request) override;
    int k() const { return k_; }

private:
    int k_;
};

struct RemoteConfig {
    std::string base_url;  // e.g. "http://localhost:8000/v1"
    std::string model;
    std::string auth_env = "ICQD_API_TOKEN";  // bearer token env var, optional
    double timeout_seconds = 30.0;
    int retries = 3;
    double backoff_seconds = 0.25;
    int max_concurrency = 4;
};

// Plain text-completion endpoint client: POST {model, prompt, max_tokens,
// temperature, stop, seed?} to <base_url>/completions, read
// choices[0].text. Retries transport failures with exponential backoff and
// caps in-flight requests.
class RemoteCompletionClient final : public CompletionBackend {
public:
    explicit RemoteCompletionClient(RemoteConfig config);
    ~RemoteCompletionClient() override;
    std::string complete(const CompletionRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// text cut at the first occurrence of any stop string
std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop);

}  // namespace icqd
