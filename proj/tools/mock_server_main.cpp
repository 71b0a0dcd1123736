// SPDX-License-Identifier: Apache-2.0

// Standalone mock logprobs endpoint for local experiments with the remote
// source. Serves a fixed token->logprob table on /v1/completions.

#include <csignal>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace {

httplib::Server* running_server = nullptr;

void stop(int) {
  if (running_server) running_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mock logprobs completion endpoint"};
  int port = 8600;
  std::string logprobs = "1:-0.4,2:-1.6,3:-3.1";
  app.add_option("--port", port, "listen port");
  app.add_option("--logprobs", logprobs,
                 "token:logprob pairs returned for every request");
  CLI11_PARSE(app, argc, argv);

  nlohmann::json table = nlohmann::json::object();
  std::istringstream parts(logprobs);
  std::string item;
  while (std::getline(parts, item, ',')) {
    const size_t colon = item.find(':');
    if (colon == std::string::npos) {
      std::cerr << "bad --logprobs entry: " << item << std::endl;
      return 1;
    }
    table[item.substr(0, colon)] = std::stod(item.substr(colon + 1));
  }

  httplib::Server server;
  running_server = &server;
  std::signal(SIGINT, stop);
  std::signal(SIGTERM, stop);

  server.Post("/v1/completions", [&table](const httplib::Request&,
                                          httplib::Response& res) {
    nlohmann::json doc = {
        {"choices",
         {{{"text", ""}, {"logprobs", {{"top_logprobs", {table}}}}}}}};
    res.set_content(doc.dump(), "application/json");
  });

  std::cout << "mock endpoint on http://127.0.0.1:" << port
            << "/v1/completions" << std::endl;
  if (!server.listen("127.0.0.1", port)) {
    std::cerr << "failed to bind port " << port << std::endl;
    return 1;
  }
  return 0;
}
