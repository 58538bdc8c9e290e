#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "polmine/scraper.hpp"

namespace polmine::scraper {

HttpResponse HttpTransport::get(const HttpRequest& request) {
  httplib::Client client(request.url.origin());
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_follow_location(true);
  std::string target = request.url.path;
  if (!request.url.query.empty()) target += "?" + request.url.query;
  httplib::Headers headers = {{"User-Agent", request.user_agent}};
  auto result = client.Get(target, headers);
  if (!result) {
    auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw TransportTimeout(httplib::to_string(err));
    }
    throw TransportFailure(httplib::to_string(err));
  }
  return {result->status, result->body, result->get_header_value("Content-Type")};
}

}  // namespace polmine::scraper
