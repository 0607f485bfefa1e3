#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scenediff/relation.hpp"

namespace scenediff {

// Newline-delimited JSON protocol spoken with an external relation
// classifier over its standard input and output.
//
//   plugin -> engine  {"ready":true,"protocol":1}
//   engine -> plugin  {"id":N,"width":W,"height":H,"image_png_b64":...,
//                      "bbox_a":[x1,y1,x2,y2],"bbox_b":[x1,y1,x2,y2]}
//   plugin -> engine  {"id":N,"label":"A_IN_B",...,"probs":{...}}
//                  or {"id":N,"error":"..."}
inline constexpr int kPluginProtocolVersion = 1;

std::string encode_plugin_request(std::uint64_t id, const ClassifierInput& input);

struct PluginReply {
  std::uint64_t id = 0;
  RelationResult result;
};

struct PluginErrorReply {
  std::uint64_t id = 0;
  std::string message;
};

// Throws ProtocolError naming the offending line.
std::variant<PluginReply, PluginErrorReply> parse_plugin_response(std::string_view line);

// Throws ProtocolError unless the line is a protocol-1 handshake.
void parse_plugin_handshake(std::string_view line);

struct PluginOptions {
  std::string command;  // run through /bin/sh -c
  std::chrono::milliseconds timeout{30000};  // per handshake and per batch
};

/**
 * One plugin process and its request/response channel. A session carries
 * one in-flight batch at a time; open several sessions for parallelism.
 * The child is terminated when the session is destroyed.
 */
class PluginSession {
 public:
  explicit PluginSession(PluginOptions options);
  ~PluginSession();

  PluginSession(const PluginSession&) = delete;
  PluginSession& operator=(const PluginSession&) = delete;

  // Responses may arrive in any order; they are matched back by id.
  std::vector<RelationResult> classify_batch(std::span<const ClassifierInput> inputs);

 private:
  std::string read_line(std::chrono::steady_clock::time_point deadline);
  void write_all(std::string_view data);
  [[noreturn]] void fail_transport(const std::string& what);
  void terminate();

  PluginOptions options_;
  int fd_ = -1;
  int pid_ = -1;
  int pgid_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
};

std::vector<RelationResult> external_classify(PluginSession& session,
                                              std::span<const ClassifierInput> inputs);

// Adapts a plugin session to the classifier interface. Queries must carry
// the scene raster.
class PluginClassifier final : public RelationClassifier {
 public:
  explicit PluginClassifier(PluginOptions options) : session_(std::move(options)) {}

  std::vector<RelationResult> classify(std::span<const RelationQuery> queries) override;

 private:
  PluginSession session_;
};

}  // namespace scenediff
