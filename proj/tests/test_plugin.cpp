#include <opencv2/imgcodecs.hpp>
#include <sodium.h>

#include "doctest.h"
#include "json.hpp"
#include "scenediff/errors.hpp"
#include "scenediff/plugin.hpp"

using namespace scenediff;
using namespace std::chrono_literals;

namespace {

std::string fake(const std::string& args) { return std::string(FAKE_PLUGIN) + " " + args; }

PluginOptions opts(const std::string& args, std::chrono::milliseconds timeout = 5000ms) {
  return {fake(args), timeout};
}

std::vector<ClassifierInput> inputs(std::size_t n) {
  cv::Mat image(120, 160, CV_8UC3, cv::Scalar(30, 60, 90));
  std::vector<ClassifierInput> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i % 50);
    out.push_back(build_classifier_input(image, {"a", {"cup"}, 1, {x, 10, x + 30, 40}},
                                         {"b", {"pot"}, 1, {x + 10, 20, x + 60, 70}}));
  }
  return out;
}

}  // namespace

TEST_CASE("request encoding") {
  const auto in = inputs(1)[0];
  const auto req = nlohmann::json::parse(encode_plugin_request(7, in));
  CHECK(req["id"] == 7);
  CHECK(req["width"] == 60);
  CHECK(req["height"] == 60);
  CHECK(req["bbox_a"] == nlohmann::json::array({0.0, 0.0, 30.0, 30.0}));
  CHECK(req["bbox_b"] == nlohmann::json::array({10.0, 10.0, 60.0, 60.0}));

  const std::string b64 = req["image_png_b64"];
  std::vector<unsigned char> png(b64.size());
  std::size_t len = 0;
  REQUIRE(sodium_base642bin(png.data(), png.size(), b64.data(), b64.size(), nullptr, &len, nullptr,
                            sodium_base64_VARIANT_ORIGINAL) == 0);
  png.resize(len);
  const cv::Mat decoded = cv::imdecode(png, cv::IMREAD_COLOR);
  REQUIRE(decoded.cols == 60);
  CHECK(decoded.at<cv::Vec3b>(0, 0) == cv::Vec3b(30, 60, 90));
}

TEST_CASE("response parsing") {
  const auto ok = parse_plugin_response(R"({"id":3,"label":"B_IN_A"})");
  REQUIRE(std::holds_alternative<PluginReply>(ok));
  CHECK(std::get<PluginReply>(ok).result.label == RelationLabel::BInA);
  const auto err = parse_plugin_response(R"({"id":4,"error":"nope"})");
  REQUIRE(std::holds_alternative<PluginErrorReply>(err));
  CHECK(std::get<PluginErrorReply>(err).message == "nope");
  try {
    parse_plugin_response("garbage here");
    FAIL("expected a protocol error");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("garbage here") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_plugin_response(R"({"label":"B_IN_A"})"), ProtocolError);
  CHECK_THROWS_AS(parse_plugin_response(R"({"id":1,"label":"SIDEWAYS"})"), ProtocolError);
  CHECK_THROWS_AS(
      parse_plugin_response(R"({"id":1,"label":"A_IN_B","probs":{"A_IN_B":0.5,"B_IN_A":0.1,"A_ON_B":0.1,"B_ON_A":0.1}})"),
      ProtocolError);
  CHECK_NOTHROW(parse_plugin_handshake(R"({"ready":true,"protocol":1})"));
  CHECK_THROWS_AS(parse_plugin_handshake(R"({"ready":true,"protocol":2})"), ProtocolError);
}

TEST_CASE("echo plugin answers every request") {
  PluginSession s(opts("label UNRELATED"));
  const auto r = external_classify(s, inputs(10));
  REQUIRE(r.size() == 10);
  for (const auto& x : r) CHECK(x.label == RelationLabel::Unrelated);
  // The session stays usable for further batches.
  CHECK(s.classify_batch(inputs(3)).size() == 3);
}

TEST_CASE("out-of-order responses are matched by id") {
  PluginSession s(opts("reverse"));
  const auto r = s.classify_batch(inputs(9));
  REQUIRE(r.size() == 9);
  // Request ids start at 1; even ids were answered A_ON_B.
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r[i].label == ((i + 1) % 2 == 0 ? RelationLabel::AOnB : RelationLabel::Unrelated));
  }
}

TEST_CASE("large batches do not deadlock") {
  PluginSession s(opts("label A_IN_B", 20000ms));
  const auto r = s.classify_batch(inputs(400));
  CHECK(r.size() == 400);
  CHECK(r.back().label == RelationLabel::AInB);
}

TEST_CASE("scores are checked") {
  PluginSession good(opts("probs B_ON_A"));
  const auto r = good.classify_batch(inputs(2));
  REQUIRE(r[0].probs.has_value());
  CHECK((*r[0].probs)[3] == 0.6);
  PluginSession bad(opts("bad-probs B_ON_A"));
  CHECK_THROWS_AS(bad.classify_batch(inputs(1)), ProtocolError);
}

TEST_CASE("protocol errors") {
  for (const char* mode : {"malformed", "wrong-id", "bad-label", "error"}) {
    CAPTURE(mode);
    PluginSession s(opts(mode));
    CHECK_THROWS_AS(s.classify_batch(inputs(2)), ProtocolError);
  }
  CHECK_THROWS_AS(PluginSession(opts("bad-handshake")), ProtocolError);
}

TEST_CASE("transport errors") {
  SUBCASE("plugin crashes mid-batch") {
    PluginSession s(opts("crash"));
    try {
      s.classify_batch(inputs(2));
      FAIL("expected a transport error");
    } catch (const TransportError& e) {
      CHECK(std::string(e.what()).find("status 3") != std::string::npos);
    }
  }
  SUBCASE("plugin exits before the handshake") {
    CHECK_THROWS_AS(PluginSession(opts("die-early")), TransportError);
    CHECK_THROWS_AS(PluginSession({"/nonexistent/plugin/binary", 2000ms}), TransportError);
  }
  SUBCASE("timeouts") {
    CHECK_THROWS_AS(PluginSession(opts("silent", 200ms)), TransportError);
    PluginSession s(opts("hang", 200ms));
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(s.classify_batch(inputs(1)), TransportError);
    CHECK(std::chrono::steady_clock::now() - t0 < 2s);
  }
}

TEST_CASE("plugin classifier needs images") {
  PluginClassifier c(opts("label A_ON_B"));
  Detection a{"a", {"cup"}, 1, {0, 0, 10, 10}}, b{"b", {"pot"}, 1, {5, 5, 20, 20}};
  Scene s{40, 40, std::nullopt, {a, b}};
  const RelationQuery q{SceneSide::Initial, &s, nullptr, &a, &b};
  CHECK_THROWS_AS(c.classify_one(q), DataError);
  const cv::Mat img(40, 40, CV_8UC3, cv::Scalar(0, 0, 0));
  const RelationQuery with_image{SceneSide::Initial, &s, &img, &a, &b};
  CHECK(c.classify_one(with_image).label == RelationLabel::AOnB);
}
