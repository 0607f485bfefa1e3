#include "scenediff/plugin.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>
#include <thread>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <sodium.h>

#include "json.hpp"
#include "scenediff/errors.hpp"

namespace scenediff {

using nlohmann::json;

namespace {

std::string base64(const std::vector<std::uint8_t>& bytes) {
  const std::size_t len = sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  std::string out(len, '\0');
  sodium_bin2base64(out.data(), len, bytes.data(), bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  out.resize(len - 1);  // drop the terminating NUL
  return out;
}

std::string excerpt(std::string_view line) {
  constexpr std::size_t kMax = 120;
  return line.size() <= kMax ? std::string(line) : std::string(line.substr(0, kMax)) + "...";
}

json box_json(const BoundingBox& b) {
  return json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
}

}  // namespace

std::string encode_plugin_request(std::uint64_t id, const ClassifierInput& input) {
  cv::Mat bgr;
  cv::cvtColor(input.rgb, bgr, cv::COLOR_RGB2BGR);
  std::vector<std::uint8_t> png;
  cv::imencode(".png", bgr, png);
  json req = {{"id", id},
              {"width", input.width},
              {"height", input.height},
              {"image_png_b64", base64(png)},
              {"bbox_a", box_json(input.bbox_a)},
              {"bbox_b", box_json(input.bbox_b)}};
  return req.dump();
}

void parse_plugin_handshake(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error&) {
    throw ProtocolError("malformed plugin handshake: '" + excerpt(line) + "'");
  }
  if (!doc.is_object() || doc.value("ready", false) != true || !doc.contains("protocol") ||
      !doc["protocol"].is_number_integer() || doc["protocol"].get<int>() != kPluginProtocolVersion) {
    throw ProtocolError("unexpected plugin handshake: '" + excerpt(line) + "'");
  }
}

std::variant<PluginReply, PluginErrorReply> parse_plugin_response(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error&) {
    throw ProtocolError("malformed plugin response line: '" + excerpt(line) + "'");
  }
  if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_number_unsigned()) {
    throw ProtocolError("plugin response without unsigned id: '" + excerpt(line) + "'");
  }
  const auto id = doc["id"].get<std::uint64_t>();
  if (doc.contains("error")) {
    return PluginErrorReply{id, doc["error"].is_string() ? doc["error"].get<std::string>()
                                                         : doc["error"].dump()};
  }
  if (!doc.contains("label") || !doc["label"].is_string()) {
    throw ProtocolError("plugin response without label: '" + excerpt(line) + "'");
  }
  PluginReply reply;
  reply.id = id;
  try {
    reply.result.label = parse_relation_label(doc["label"].get<std::string>());
  } catch (const ParseError&) {
    throw ProtocolError("plugin response with unknown label: '" + excerpt(line) + "'");
  }
  if (doc.contains("probs")) {
    const json& probs = doc["probs"];
    if (!probs.is_object()) {
      throw ProtocolError("plugin response probs must be an object: '" + excerpt(line) + "'");
    }
    std::array<double, 5> p{};
    for (const auto label : kAllRelationLabels) {
      const std::string key(to_string(label));
      if (!probs.contains(key) || !probs[key].is_number()) {
        throw ProtocolError("plugin response probs missing '" + key + "': '" + excerpt(line) + "'");
      }
      p[static_cast<std::size_t>(index_of(label))] = probs[key].get<double>();
    }
    reply.result.probs = p;
    check_scores(reply.result);
  }
  return reply;
}

PluginSession::PluginSession(PluginOptions options) : options_(std::move(options)) {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw TransportError(std::string("socketpair failed: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw TransportError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    // Own process group, so the shell and anything it spawns die together.
    ::setpgid(0, 0);
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", options_.command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(sv[1]);
  fd_ = sv[0];
  pid_ = pid;
  pgid_ = pid;

  try {
    const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
    parse_plugin_handshake(read_line(deadline));
  } catch (...) {
    terminate();
    throw;
  }
}

PluginSession::~PluginSession() { terminate(); }

void PluginSession::terminate() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    // Closing the channel asks the plugin to exit; escalate if it lingers.
    bool exited = false;
    for (int i = 0; i < 50 && !exited; ++i) {
      exited = ::waitpid(pid_, nullptr, WNOHANG) != 0;
      if (!exited) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    }
    if (!exited) {
      ::kill(-pgid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
    pid_ = -1;
  }
  if (pgid_ > 0) {
    // Reap stragglers left in the group by the shell.
    ::kill(-pgid_, SIGKILL);
    pgid_ = -1;
  }
}

void PluginSession::fail_transport(const std::string& what) {
  std::string detail;
  int status = 0;
  // The child may still be exiting; allow it a short grace period to be reaped.
  for (int i = 0; i < 20 && pid_ > 0; ++i) {
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      if (WIFEXITED(status)) {
        detail = " (plugin exited with status " + std::to_string(WEXITSTATUS(status)) + ")";
      } else if (WIFSIGNALED(status)) {
        detail = " (plugin killed by signal " + std::to_string(WTERMSIG(status)) + ")";
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  throw TransportError(what + detail);
}

std::string PluginSession::read_line(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      if (line.find_first_not_of(" \t") == std::string::npos) {
        continue;
      }
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      fail_transport("plugin timed out after " + std::to_string(options_.timeout.count()) + " ms");
    }
    pollfd pfd{fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      fail_transport(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) {
      continue;
    }
    char chunk[65536];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_transport(std::string("read from plugin failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      fail_transport("plugin closed its output");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void PluginSession::write_all(std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("write to plugin failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::vector<RelationResult> PluginSession::classify_batch(std::span<const ClassifierInput> inputs) {
  if (fd_ < 0) {
    throw TransportError("plugin session is closed");
  }
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  std::map<std::uint64_t, std::size_t> pending;
  std::string payload;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::uint64_t id = next_id_++;
    pending.emplace(id, i);
    payload += encode_plugin_request(id, inputs[i]);
    payload += '\n';
  }
  // Write and read concurrently so a large batch cannot deadlock on full
  // socket buffers.
  std::exception_ptr write_error;
  std::thread writer([&] {
    try {
      write_all(payload);
    } catch (...) {
      write_error = std::current_exception();
    }
  });
  std::vector<RelationResult> results(inputs.size());
  std::exception_ptr read_error;
  try {
    std::size_t received = 0;
    while (received < inputs.size()) {
      const std::string line = read_line(deadline);
      auto reply = parse_plugin_response(line);
      const std::uint64_t id = std::visit([](const auto& r) { return r.id; }, reply);
      const auto it = pending.find(id);
      if (it == pending.end()) {
        throw ProtocolError("plugin response id " + std::to_string(id) +
                            " does not match any pending request: '" + excerpt(line) + "'");
      }
      if (const auto* err = std::get_if<PluginErrorReply>(&reply)) {
        throw ProtocolError("plugin reported error for request " + std::to_string(id) + ": " +
                            err->message);
      }
      results[it->second] = std::get<PluginReply>(reply).result;
      pending.erase(it);
      ++received;
    }
  } catch (...) {
    read_error = std::current_exception();
    // Unblock the writer if it is stuck on a full buffer.
    ::shutdown(fd_, SHUT_WR);
  }
  writer.join();
  if (read_error) {
    std::rethrow_exception(read_error);
  }
  if (write_error) {
    std::rethrow_exception(write_error);
  }
  return results;
}

std::vector<RelationResult> external_classify(PluginSession& session,
                                              std::span<const ClassifierInput> inputs) {
  return session.classify_batch(inputs);
}

std::vector<RelationResult> PluginClassifier::classify(std::span<const RelationQuery> queries) {
  std::vector<ClassifierInput> inputs;
  inputs.reserve(queries.size());
  for (const auto& q : queries) {
    if (q.image == nullptr) {
      throw DataError("plugin classifier needs the " + std::string(to_string(q.side)) +
                      " scene image");
    }
    inputs.push_back(build_classifier_input(*q.image, *q.a, *q.b));
  }
  if (inputs.empty()) {
    return {};
  }
  return session_.classify_batch(inputs);
}

}  // namespace scenediff
