#pragma once

// HTTP backend speaking the chat-completions JSON shape.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <string>

#include "namegen/gateway.hpp"

namespace namegen {

class OpenAICompatibleBackend final : public Backend {
public:
    OpenAICompatibleBackend(std::string base_url, std::string model, std::string api_key, int timeout_seconds = 60)
        : model_(std::move(model)), api_key_(std::move(api_key)), timeout_(timeout_seconds) {
        // Split "scheme://host[:port]/path" so the path prefix survives (e.g. ".../v1").
        auto scheme_end = base_url.find("://");
        if (scheme_end == std::string::npos) throw Error(ErrorKind::config, "base URL needs a scheme: " + base_url);
        auto path_start = base_url.find('/', scheme_end + 3);
        host_ = base_url.substr(0, path_start);
        prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    std::string complete(const std::vector<ChatMessage>& messages, const DecodingParams& params) override {
        auto body = request_json(messages, params);
        body["model"] = model_;

        httplib::Client cli(host_);
        cli.set_connection_timeout(timeout_, 0);
        cli.set_read_timeout(timeout_, 0);
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        auto res = cli.Post(prefix_ + "/chat/completions", headers, body.dump(), "application/json");
        if (!res) throw Error(ErrorKind::transport, "request to " + host_ + " failed: " + httplib::to_string(res.error()));

        const int status = res->status;
        if (status == 401 || status == 403) throw Error(ErrorKind::auth, "provider rejected credentials (HTTP " + std::to_string(status) + ")");
        if (status == 429) throw Error(ErrorKind::rate_limit, "provider rate limit (HTTP 429)");
        if (status >= 500) throw Error(ErrorKind::transport, "provider error HTTP " + std::to_string(status));
        if (status != 200) throw Error(ErrorKind::request, "unexpected HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));

        try {
            auto j = nlohmann::json::parse(res->body);
            const auto& content = j.at("choices").at(0).at("message").at("content");
            if (content.is_null()) throw Error(ErrorKind::empty_response, "null content");
            auto text = content.get<std::string>();
            if (text::trim(text).empty()) throw Error(ErrorKind::empty_response, "empty content");
            return text;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::transport, std::string("malformed provider response: ") + e.what());
        }
    }

    std::string name() const override { return model_; }

private:
    std::string host_;
    std::string prefix_;
    std::string model_;
    std::string api_key_;
    int timeout_;
};

}  // namespace namegen
