#include "ctxaug/scorer.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "ctxaug/error.hpp"

namespace ctxaug {
using nlohmann::json;

bool ScoreVector::is_simplex(double tol) const noexcept {
  if (values.empty()) return false;
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

ScoreVector mean_scores(std::span<const ScoreVector> vs) {
  if (vs.empty()) throw PreconditionError("mean of zero score vectors");
  ScoreVector out{std::vector<double>(vs.front().values.size(), 0.0)};
  for (const auto& v : vs) {
    if (v.values.size() != out.values.size()) throw PreconditionError("score vectors differ in length");
    for (std::size_t i = 0; i < v.values.size(); ++i) out.values[i] += v.values[i];
  }
  for (auto& x : out.values) x /= static_cast<double>(vs.size());
  return out;
}

std::vector<ScoreVector> Scorer::score_batch(std::span<const ContextualImage> images) {
  if (images.empty()) return {};
  if (images.size() > max_batch())
    throw PreconditionError("batch of " + std::to_string(images.size()) + " exceeds max " +
                            std::to_string(max_batch()));
  auto out = do_score(images);
  if (out.size() != images.size()) throw ProtocolError("scorer returned a wrong number of results");
  for (const auto& s : out) {
    if (static_cast<int>(s.values.size()) != num_classes() + 1 || !s.is_simplex())
      throw ProtocolError("scorer returned an invalid score vector");
  }
  return out;
}

std::vector<ScoreVector> UniformScorer::do_score(std::span<const ContextualImage> images) {
  const auto n = static_cast<std::size_t>(num_classes_ + 1);
  return std::vector<ScoreVector>(images.size(), ScoreVector{std::vector<double>(n, 1.0 / static_cast<double>(n))});
}

OracleScorer::OracleScorer(const Dataset& ds) : num_classes_(ds.categories.num_classes()) {
  for (const auto& img : ds.images) {
    auto& v = boxes_[img.image_id];
    for (const auto& o : img.objects)
      if (!o.is_crowd) v.push_back({o.class_id, o.box});
  }
}

ScoreVector OracleScorer::score_box(const std::string& image_id, const Box& query) const {
  std::set<int> hits;
  if (auto it = boxes_.find(image_id); it != boxes_.end())
    for (const auto& gt : it->second)
      if (iou(gt.box, query) >= kMinIou) hits.insert(gt.class_id);

  const auto n = static_cast<std::size_t>(num_classes_ + 1);
  ScoreVector s{std::vector<double>(n, 0.0)};
  std::vector<bool> confident(n, false);
  if (hits.empty()) {
    confident[0] = true;
  } else {
    for (int c : hits) confident[static_cast<std::size_t>(c)] = true;
  }
  const auto k = static_cast<std::size_t>(std::count(confident.begin(), confident.end(), true));
  const std::size_t rest = n - k;
  for (std::size_t i = 0; i < n; ++i) {
    if (confident[i]) s.values[i] = (rest == 0 ? 1.0 : kConfident) / static_cast<double>(k);
    else s.values[i] = (1.0 - kConfident) / static_cast<double>(rest);
  }
  return s;
}

std::vector<ScoreVector> OracleScorer::do_score(std::span<const ContextualImage> images) {
  std::vector<ScoreVector> out;
  out.reserve(images.size());
  for (const auto& ci : images) out.push_back(score_box(ci.image_id, ci.source_box));
  return out;
}

std::size_t ScriptedScorer::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::vector<ScoreVector> ScriptedScorer::do_score(std::span<const ContextualImage> images) {
  std::lock_guard lock(mu_);
  std::vector<ScoreVector> out;
  out.reserve(images.size());
  for (const auto& ci : images) out.push_back(script_(ci, calls_++));
  return out;
}

namespace protocol {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 payload length is not a multiple of 4");
  std::vector<std::uint8_t> out(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ProtocolError("invalid base64 payload");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

std::string encode_request(long long id, const RgbImage& pixels) {
  std::string s = "{\"id\":" + std::to_string(id) + ",\"w\":" + std::to_string(pixels.width()) +
                  ",\"h\":" + std::to_string(pixels.height()) + ",\"rgb\":\"";
  s += base64_encode(pixels.data());
  s += "\"}";
  return s;
}

std::string encode_handshake(int num_classes) {
  return "{\"protocol\":" + std::to_string(kVersion) + ",\"num_classes\":" + std::to_string(num_classes) + "}";
}

std::string encode_response(long long id, const ScoreVector& scores) {
  return json{{"id", id}, {"scores", scores.values}}.dump();
}

Request decode_request(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed request: ") + e.what());
  }
  const long long id = j.is_object() && j.contains("id") && j["id"].is_number_integer() ? j["id"].get<long long>() : -1;
  try {
    const int w = j.at("w").get<int>();
    const int h = j.at("h").get<int>();
    if (w <= 0 || h <= 0) throw ProtocolError("non-positive raster size", id);
    auto bytes = base64_decode(j.at("rgb").get<std::string>());
    if (bytes.size() != static_cast<std::size_t>(w) * h * 3) throw ProtocolError("rgb payload size mismatch", id);
    Request r{id, RgbImage(w, h)};
    std::copy(bytes.begin(), bytes.end(), r.pixels.data().begin());
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed request: ") + e.what(), id);
  } catch (const ProtocolError& e) {
    throw ProtocolError(e.what(), id);
  }
}

}  // namespace protocol

StreamScorer::StreamScorer(std::unique_ptr<LineTransport> transport, StreamScorerOptions opts)
    : transport_(std::move(transport)), opts_(opts) {
  auto hs = handshake_.get_future();
  reader_ = std::thread([this] { reader_loop(); });
  try {
    if (hs.wait_for(opts_.timeout) != std::future_status::ready)
      throw ScorerUnavailable("scorer did not complete the handshake within the timeout");
    num_classes_ = hs.get();
  } catch (...) {
    stop_ = true;
    reader_.join();
    transport_->close();
    throw;
  }
}

StreamScorer::~StreamScorer() {
  stop_ = true;
  if (reader_.joinable()) reader_.join();
  transport_->close();
}

void StreamScorer::fail_all(const std::exception_ptr& e) {
  std::lock_guard lock(mu_);
  if (!dead_) dead_ = e;
  for (auto& [id, p] : pending_) p.promise.set_exception(e);
  in_flight_ -= pending_.size();
  pending_.clear();
  if (!handshake_done_) {
    handshake_done_ = true;
    handshake_.set_exception(e);
  }
  slot_cv_.notify_all();
}

void StreamScorer::reader_loop() {
  while (!stop_) {
    std::optional<std::string> line;
    try {
      line = transport_->read_line(stop_);
    } catch (...) {
      fail_all(std::current_exception());
      return;
    }
    if (!line) {
      if (!stop_) fail_all(std::make_exception_ptr(ScorerUnavailable("scorer closed the connection")));
      else fail_all(std::make_exception_ptr(ScorerUnavailable("scorer gateway shut down")));
      return;
    }
    if (line->empty()) continue;

    json j;
    try {
      j = json::parse(*line);
    } catch (const json::parse_error&) {
      fail_all(std::make_exception_ptr(ProtocolError("scorer sent a line that is not JSON")));
      return;
    }
    bool need_handshake;
    {
      std::lock_guard lock(mu_);
      need_handshake = !handshake_done_;
    }
    if (need_handshake) {
      const bool ok = j.is_object() && j.value("protocol", 0) == protocol::kVersion && j.contains("num_classes") &&
                      j["num_classes"].is_number_integer() && j["num_classes"].get<int>() >= 1;
      std::lock_guard lock(mu_);
      handshake_done_ = true;
      if (ok) {
        handshake_.set_value(j["num_classes"].get<int>());
        continue;
      }
      auto e = std::make_exception_ptr(ProtocolError("bad handshake: " + line->substr(0, 200)));
      dead_ = e;
      handshake_.set_exception(e);
      return;
    }

    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
      fail_all(std::make_exception_ptr(ProtocolError("scorer response without an integer id")));
      return;
    }
    const long long id = j["id"].get<long long>();
    std::lock_guard lock(mu_);
    auto it = pending_.find(id);
    if (it == pending_.end()) {
      spdlog::warn("scorer answered unknown or expired request id {}", id);
      continue;
    }
    try {
      if (j.contains("error"))
        throw ProtocolError("scorer error for request " + std::to_string(id) + ": " + j["error"].dump(), id);
      ScoreVector s{j.at("scores").get<std::vector<double>>()};
      if (s.num_classes() != num_classes_ || !s.is_simplex())
        throw ProtocolError("invalid score vector for request " + std::to_string(id), id);
      it->second.promise.set_value(std::move(s));
    } catch (const ProtocolError&) {
      it->second.promise.set_exception(std::current_exception());
    } catch (const json::exception& e) {
      it->second.promise.set_exception(
          std::make_exception_ptr(ProtocolError("malformed response for request " + std::to_string(id), id)));
    }
    pending_.erase(it);
    --in_flight_;
    slot_cv_.notify_one();
  }
}

std::vector<ScoreVector> StreamScorer::do_score(std::span<const ContextualImage> images) {
  std::vector<std::pair<long long, std::future<ScoreVector>>> waits;
  waits.reserve(images.size());
  for (const auto& ci : images) {
    const long long id = next_id_++;
    {
      std::unique_lock lock(mu_);
      if (!slot_cv_.wait_for(lock, opts_.timeout, [&] { return dead_ || in_flight_ < opts_.max_in_flight; }))
        throw ScorerUnavailable("timed out waiting for a free scorer slot");
      if (dead_) std::rethrow_exception(dead_);
      ++in_flight_;
      waits.emplace_back(id, pending_[id].promise.get_future());
    }
    const std::string msg = protocol::encode_request(id, ci.pixels);
    try {
      std::lock_guard wlock(write_mu_);
      transport_->write_line(msg);
    } catch (...) {
      fail_all(std::current_exception());
      throw;
    }
  }
  std::vector<ScoreVector> out;
  out.reserve(images.size());
  for (auto& [id, fut] : waits) {
    if (fut.wait_for(opts_.timeout) != std::future_status::ready) {
      std::lock_guard lock(mu_);
      if (pending_.erase(id)) {
        --in_flight_;
        slot_cv_.notify_one();
      }
      throw ScorerUnavailable("scorer did not answer request " + std::to_string(id) + " within the timeout");
    }
    out.push_back(fut.get());
  }
  return out;
}

std::unique_ptr<Scorer> make_scorer(const std::string& spec, const Dataset& ds, StreamScorerOptions opts) {
  const int c = ds.categories.num_classes();
  std::unique_ptr<Scorer> scorer;
  if (spec == "uniform") return std::make_unique<UniformScorer>(c);
  if (spec == "oracle") return std::make_unique<OracleScorer>(ds);
  if (spec.rfind("process:", 0) == 0) {
    scorer = std::make_unique<StreamScorer>(spawn_process_transport(spec.substr(8)), opts);
  } else if (spec.rfind("tcp:", 0) == 0) {
    const std::string addr = spec.substr(4);
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw ConfigError("tcp scorer needs host:port, got '" + addr + "'");
    int port = 0;
    try {
      port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad port in '" + addr + "'");
    }
    scorer = std::make_unique<StreamScorer>(connect_tcp_transport(addr.substr(0, colon), port), opts);
  } else {
    throw ConfigError("unknown scorer '" + spec + "' (expected uniform, oracle, process:<cmd> or tcp:<host:port>)");
  }
  if (scorer->num_classes() != c)
    throw ProtocolError("scorer declares " + std::to_string(scorer->num_classes()) + " classes, dataset has " +
                        std::to_string(c));
  return scorer;
}

std::vector<ScoreVector> averaged_scores(const AnnotatedImage& image, std::span<const Box> boxes, int k, Rng& rng,
                                         Scorer& scorer, const ContextOptions& opts) {
  if (k < 1) throw PreconditionError("need at least one contextual variant");
  const auto per_box = static_cast<std::size_t>(k);
  const std::size_t boxes_per_chunk = std::max<std::size_t>(1, scorer.max_batch() / per_box);
  if (per_box > scorer.max_batch()) throw PreconditionError("variants exceed the scorer batch size");

  std::vector<ScoreVector> out;
  out.reserve(boxes.size());
  std::vector<ContextualImage> batch;
  for (std::size_t start = 0; start < boxes.size(); start += boxes_per_chunk) {
    const std::size_t end = std::min(boxes.size(), start + boxes_per_chunk);
    batch.clear();
    for (std::size_t b = start; b < end; ++b)
      for (std::size_t v = 0; v < per_box; ++v)
        batch.push_back(scorer.uses_pixels() ? make_contextual(image, boxes[b], rng, opts)
                                             : contextual_geometry(image, boxes[b], rng, opts));
    const auto scores = scorer.score_batch(batch);
    for (std::size_t b = 0; b < end - start; ++b)
      out.push_back(mean_scores(std::span(scores).subspan(b * per_box, per_box)));
  }
  return out;
}

ScoreVector averaged_score(const AnnotatedImage& image, const Box& box, int k, Rng& rng, Scorer& scorer,
                           const ContextOptions& opts) {
  return averaged_scores(image, std::span(&box, 1), k, rng, scorer, opts).front();
}

}  // namespace ctxaug
