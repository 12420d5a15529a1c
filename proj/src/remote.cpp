#include "fewshot/promptkit.hpp"

#include "fewshot/parallel.hpp"

#include <httplib.h>
#include <json.hpp>

namespace fewshot {

using nlohmann::json;

namespace {

struct Endpoint {
    std::string base;    // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint must look like http://host[:port][/prefix]: " + url);
    const auto path = url.find('/', scheme + 3);
    Endpoint e;
    e.base = url.substr(0, path);
    if (path != std::string::npos) e.prefix = url.substr(path);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    return e;
}

std::string batch_name(std::size_t batch, std::size_t begin, std::size_t end) {
    return "batch " + std::to_string(batch) + " (prompts " + std::to_string(begin) + ".." +
           std::to_string(end - 1) + ")";
}

/// One request. Returns the answers or sets `error` on a transport-level
/// failure (retryable).
std::optional<std::vector<std::string>> post_batch(httplib::Client& client, const std::string& path,
                                                   const std::string& body, std::string& error) {
    auto res = client.Post(path, body, "application/json");
    if (!res) {
        error = "transport error: " + httplib::to_string(res.error());
        return std::nullopt;
    }
    if (res->status != 200) {
        error = "HTTP status " + std::to_string(res->status);
        return std::nullopt;
    }
    try {
        const auto doc = json::parse(res->body);
        return doc.at("answers").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        error = std::string("malformed response: ") + e.what();
        return std::nullopt;
    }
}

}  // namespace

std::vector<std::string> predict_remote(const std::vector<Prompt>& prompts, const RemoteOptions& options) {
    if (options.batch_size < 1) throw ConfigError("batch_size must be positive");
    const Endpoint ep = split_endpoint(options.endpoint);
    const std::string path = ep.prefix + "/v1/predict";
    const std::size_t n_batches = (prompts.size() + options.batch_size - 1) / options.batch_size;
    std::vector<std::string> labels(prompts.size());

    parallel_for(n_batches, std::max(1u, options.max_concurrency), [&](std::size_t b) {
        const std::size_t begin = b * options.batch_size;
        const std::size_t end = std::min(prompts.size(), begin + options.batch_size);
        json request;
        request["prompts"] = json::array();
        for (std::size_t i = begin; i < end; ++i) request["prompts"].push_back(prompts[i].rendered_text);
        const std::string body = request.dump(-1, ' ', false, json::error_handler_t::replace);

        httplib::Client client(ep.base);
        client.set_connection_timeout(options.timeout);
        client.set_read_timeout(options.timeout);
        client.set_write_timeout(options.timeout);

        std::string error;
        std::optional<std::vector<std::string>> answers;
        for (unsigned attempt = 0; attempt <= options.retries && !answers; ++attempt) {
            answers = post_batch(client, path, body, error);
        }
        if (!answers) {
            throw Error("transport_failure", batch_name(b, begin, end) + " failed after " +
                                                 std::to_string(options.retries + 1) + " attempt(s): " + error);
        }
        if (answers->size() != end - begin) {
            throw Error("count_mismatch", batch_name(b, begin, end) + ": service returned " +
                                              std::to_string(answers->size()) + " answers for " +
                                              std::to_string(end - begin) + " prompts");
        }
        for (std::size_t i = begin; i < end; ++i) {
            labels[i] = normalize_answer((*answers)[i - begin], prompts[i].choices);
        }
    });
    return labels;
}

PredictionSet predict_remote_manifest(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets,
                                      const RemoteOptions& options, ProtocolTag tag) {
    std::vector<Prompt> all;
    std::vector<std::pair<std::string, std::size_t>> spans;  // episode id, count
    for (const auto& e : manifest.episodes) {
        const Dataset* ds = nullptr;
        for (const auto& d : datasets) {
            if (d.spec.dataset_id == e.dataset_id) ds = &d;
        }
        if (!ds) throw Error("unknown_dataset", "no dataset loaded for '" + e.dataset_id + "'");
        auto prompts = episode_prompts(e, *ds);
        spans.emplace_back(e.episode_id, prompts.size());
        for (auto& p : prompts) all.push_back(std::move(p));
    }
    const auto labels = predict_remote(all, options);
    PredictionSet out;
    out.manifest_checksum = manifest.checksum;
    out.protocol_tag = tag;
    std::size_t cursor = 0;
    for (const auto& [id, count] : spans) {
        out.entries[id] = std::vector<std::string>(labels.begin() + cursor, labels.begin() + cursor + count);
        cursor += count;
    }
    return out;
}

}  // namespace fewshot
