// Scripted stand-in for a relation classifier plugin, used by the tests.
// Usage: fake_plugin MODE [LABEL]

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

std::string pending;

// Next line from stdin; false on EOF or when idle for `idle_ms` (if >= 0).
bool next_line(std::string& line, int idle_ms = -1) {
  for (;;) {
    const auto nl = pending.find('\n');
    if (nl != std::string::npos) {
      line = pending.substr(0, nl);
      pending.erase(0, nl + 1);
      return true;
    }
    if (idle_ms >= 0) {
      pollfd p{0, POLLIN, 0};
      if (::poll(&p, 1, idle_ms) <= 0) return false;
    }
    char buf[65536];
    const ssize_t n = ::read(0, buf, sizeof buf);
    if (n <= 0) return false;
    pending.append(buf, static_cast<std::size_t>(n));
  }
}

void say(const json& j) {
  const std::string s = j.dump() + "\n";
  if (::write(1, s.data(), s.size()) < 0) std::_Exit(9);
}

void sleep_forever() {
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(60));
}

bool valid_request(const json& r) {
  return r.is_object() && r.contains("id") && r["width"].get<int>() > 0 && r["height"].get<int>() > 0 &&
         r["image_png_b64"].is_string() && !r["image_png_b64"].get<std::string>().empty() &&
         r["bbox_a"].size() == 4 && r["bbox_b"].size() == 4;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "label";
  const std::string label = argc > 2 ? argv[2] : "UNRELATED";

  if (mode == "die-early") return 1;
  if (mode == "silent") sleep_forever();
  if (mode == "bad-handshake") {
    say({{"ready", true}, {"protocol", 2}});
    sleep_forever();
  }
  say({{"ready", true}, {"protocol", 1}});

  if (mode == "reverse") {
    // Answers each burst of requests in reverse order; even ids get A_ON_B.
    std::string line;
    std::vector<json> burst;
    for (;;) {
      const bool got = next_line(line, burst.empty() ? -1 : 50);
      if (got) {
        burst.push_back(json::parse(line));
        continue;
      }
      if (burst.empty()) return 0;
      std::reverse(burst.begin(), burst.end());
      for (const auto& r : burst) {
        const auto id = r["id"].get<std::uint64_t>();
        say({{"id", id}, {"label", id % 2 == 0 ? "A_ON_B" : "UNRELATED"}});
      }
      burst.clear();
    }
  }

  std::string line;
  while (next_line(line)) {
    const json r = json::parse(line);
    const auto id = r["id"].get<std::uint64_t>();
    if (mode == "crash") return 3;
    if (mode == "hang") sleep_forever();
    if (mode == "malformed") {
      const std::string s = "this is not json\n";
      if (::write(1, s.data(), s.size()) < 0) return 9;
    } else if (mode == "wrong-id") {
      say({{"id", id + 1000}, {"label", label}});
    } else if (mode == "bad-label") {
      say({{"id", id}, {"label", "A_UNDER_B"}});
    } else if (mode == "error") {
      say({{"id", id}, {"error", "cannot classify"}});
    } else if (mode == "probs" || mode == "bad-probs") {
      json probs = {{"A_IN_B", 0.1}, {"B_IN_A", 0.1}, {"A_ON_B", 0.1}, {"B_ON_A", 0.1}, {"UNRELATED", 0.1}};
      probs[label] = mode == "probs" ? 0.6 : 0.3;
      say({{"id", id}, {"label", label}, {"probs", probs}});
    } else if (!valid_request(r)) {
      say({{"id", id}, {"error", "invalid request"}});
    } else {
      say({{"id", id}, {"label", label}});
    }
  }
  return 0;
}
