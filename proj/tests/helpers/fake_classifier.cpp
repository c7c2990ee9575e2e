// Stand-in external model for the subprocess protocol tests.
//
//   fake_classifier mean [scale]   p = min(1, scale * mean intensity)
//   fake_classifier constant p
//   fake_classifier exit code      exits with `code` on the first request
//   fake_classifier hang           never answers
//   fake_classifier wrong-id       answers with a different id
//   fake_classifier garbage        answers with a line that is not JSON
//   fake_classifier out-of-range   answers 1.5
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <string>
#include <thread>

#include <json.hpp>

#include "contrastex/util/base64.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "mean";
  const double arg = argc > 2 ? std::atof(argv[2]) : 1.0;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto request = nlohmann::json::parse(line);
    const long id = request.at("id").get<long>();
    const auto pixels = contrastex::decode_f32_le(request.at("pixels_b64").get<std::string>());
    const auto expected = request.at("width").get<std::size_t>() * request.at("height").get<std::size_t>();
    if (pixels.size() != expected) return 9;

    double p = 0.0;
    if (mode == "mean") {
      const double mean = std::accumulate(pixels.begin(), pixels.end(), 0.0) / static_cast<double>(pixels.size());
      p = std::min(1.0, arg * mean);
    } else if (mode == "constant") {
      p = arg;
    } else if (mode == "exit") {
      return static_cast<int>(arg);
    } else if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::hours(1));
    } else if (mode == "garbage") {
      std::cout << "not json" << std::endl;
      continue;
    } else if (mode == "out-of-range") {
      p = 1.5;
    }
    const long reply_id = mode == "wrong-id" ? id + 1 : id;
    std::cout << nlohmann::json{{"id", reply_id}, {"probability", p}}.dump() << std::endl;
  }
  return 0;
}
