#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "json.hpp"
#include "polmine/classifier.hpp"

namespace polmine::classifier {

HttpCompletionClient::HttpCompletionClient(EndpointConfig config) : config_(std::move(config)) {
  if (!Url::parse(config_.url)) throw ValidationError("endpoint url '" + config_.url + "' is not absolute");
  if (config_.model.empty()) throw ValidationError("endpoint model is empty");
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    api_key_ = key;
  } else {
    throw ValidationError("environment variable " + config_.api_key_env + " holding the endpoint key is not set");
  }
}

std::string HttpCompletionClient::complete(const std::string& prompt) {
  auto url = *Url::parse(config_.url);
  httplib::Client client(url.origin());
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  client.set_connection_timeout(seconds.count(), 0);
  client.set_read_timeout(seconds.count(), 0);
  client.set_bearer_token_auth(api_key_);

  nlohmann::json request = {{"model", config_.model},
                            {"temperature", 0},
                            {"messages", {{{"role", "user"}, {"content", prompt}}}}};
  std::string target = url.path.empty() ? "/" : url.path;
  if (!url.query.empty()) target += "?" + url.query;
  auto result = client.Post(target, request.dump(), "application/json");
  if (!result) throw CompletionError("endpoint unreachable: " + httplib::to_string(result.error()));
  if (result->status < 200 || result->status >= 300) {
    throw CompletionError("endpoint answered HTTP " + std::to_string(result->status));
  }
  auto reply = nlohmann::json::parse(result->body, nullptr, false);
  if (reply.is_discarded()) throw CompletionError("endpoint reply is not JSON");
  try {
    const auto& choice = reply.at("choices").at(0);
    if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw CompletionError("endpoint reply has no completion text");
  }
}

}  // namespace polmine::classifier
