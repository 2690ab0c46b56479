#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "ctxaug/context_extract.hpp"
#include "ctxaug/dataset.hpp"

namespace ctxaug {

/// Class scores for one contextual image; index 0 is background.
struct ScoreVector {
  std::vector<double> values;

  int num_classes() const noexcept { return static_cast<int>(values.size()) - 1; }
  double operator[](std::size_t i) const { return values.at(i); }
  /// Every value in [0, 1] and the sum within `tol` of 1.
  bool is_simplex(double tol = 1e-5) const noexcept;
};

/// Componentwise arithmetic mean. Requires a non-empty span of equal sizes.
ScoreVector mean_scores(std::span<const ScoreVector> vs);

class Scorer {
 public:
  static constexpr std::size_t kDefaultMaxBatch = 64;

  virtual ~Scorer() = default;
  virtual int num_classes() const = 0;
  virtual std::size_t max_batch() const { return kDefaultMaxBatch; }
  /// False when only the geometry of a ContextualImage is read; callers may
  /// then skip rendering the raster.
  virtual bool uses_pixels() const { return true; }

  /// One ScoreVector per input, in input order. Batches larger than
  /// max_batch() are a precondition violation; every result is re-validated
  /// (ProtocolError when it is not a simplex of num_classes() + 1 entries).
  std::vector<ScoreVector> score_batch(std::span<const ContextualImage> images);

 protected:
  virtual std::vector<ScoreVector> do_score(std::span<const ContextualImage> images) = 0;
};

/// 1/(C+1) everywhere.
class UniformScorer final : public Scorer {
 public:
  explicit UniformScorer(int num_classes) : num_classes_(num_classes) {}
  int num_classes() const override { return num_classes_; }
  bool uses_pixels() const override { return false; }

 protected:
  std::vector<ScoreVector> do_score(std::span<const ContextualImage> images) override;

 private:
  int num_classes_;
};

/// Scores a query box from ground-truth co-occurrence in its source image:
/// classes with a GT box at IoU >= 0.3 share 0.9, otherwise background gets
/// 0.9; the remaining 0.1 is spread evenly over the other entries.
class OracleScorer final : public Scorer {
 public:
  static constexpr double kMinIou = 0.3;
  static constexpr double kConfident = 0.9;

  explicit OracleScorer(const Dataset& ds);
  int num_classes() const override { return num_classes_; }
  bool uses_pixels() const override { return false; }

  ScoreVector score_box(const std::string& image_id, const Box& query) const;

 protected:
  std::vector<ScoreVector> do_score(std::span<const ContextualImage> images) override;

 private:
  struct Gt {
    int class_id;
    Box box;
  };
  int num_classes_;
  std::unordered_map<std::string, std::vector<Gt>> boxes_;
};

/// Scores through a callback; the second argument counts calls since
/// construction (input order). Serialised internally.
class ScriptedScorer final : public Scorer {
 public:
  using Script = std::function<ScoreVector(const ContextualImage&, std::size_t call)>;
  ScriptedScorer(int num_classes, Script script) : num_classes_(num_classes), script_(std::move(script)) {}
  int num_classes() const override { return num_classes_; }
  std::size_t calls() const;

 protected:
  std::vector<ScoreVector> do_score(std::span<const ContextualImage> images) override;

 private:
  int num_classes_;
  Script script_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

/// Bidirectional line channel to an external scorer.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  /// Writes `line` plus LF. Throws ScorerUnavailable when the peer is gone.
  virtual void write_line(std::string_view line) = 0;
  /// Next line without its LF; nullopt on end of stream or when `stop` is
  /// raised while waiting.
  virtual std::optional<std::string> read_line(const std::atomic<bool>& stop) = 0;
  virtual void close() noexcept = 0;
};

/// `/bin/sh -c <command>` with stdin/stdout as the channel.
std::unique_ptr<LineTransport> spawn_process_transport(const std::string& command);
/// Connects to host:port.
std::unique_ptr<LineTransport> connect_tcp_transport(const std::string& host, int port);

namespace protocol {

inline constexpr int kVersion = 1;

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// {"id":N,"w":300,"h":300,"rgb":"<base64 RGB8 row-major>"}
std::string encode_request(long long id, const RgbImage& pixels);
/// {"protocol":1,"num_classes":C}
std::string encode_handshake(int num_classes);
/// {"id":N,"scores":[...]}
std::string encode_response(long long id, const ScoreVector& scores);

struct Request {
  long long id = 0;
  RgbImage pixels;
};
/// Throws ProtocolError (carrying the id when it could be read).
Request decode_request(std::string_view line);

}  // namespace protocol

struct StreamScorerOptions {
  std::chrono::milliseconds timeout{30000};
  std::size_t max_in_flight = 128;
  std::size_t max_batch = Scorer::kDefaultMaxBatch;
};

/// Client side of the wire protocol. Requests from any number of threads are
/// multiplexed onto one stream and matched back by id, so the peer may answer
/// out of order. At most max_in_flight requests are outstanding.
class StreamScorer final : public Scorer {
 public:
  StreamScorer(std::unique_ptr<LineTransport> transport, StreamScorerOptions opts = {});
  ~StreamScorer() override;
  StreamScorer(const StreamScorer&) = delete;
  StreamScorer& operator=(const StreamScorer&) = delete;

  int num_classes() const override { return num_classes_; }
  std::size_t max_batch() const override { return opts_.max_batch; }

 protected:
  std::vector<ScoreVector> do_score(std::span<const ContextualImage> images) override;

 private:
  struct Pending {
    std::promise<ScoreVector> promise;
  };

  void reader_loop();
  void fail_all(const std::exception_ptr& e);
  void acquire_slot();
  void release_slot();

  std::unique_ptr<LineTransport> transport_;
  StreamScorerOptions opts_;
  int num_classes_ = 0;

  std::mutex write_mu_;
  std::mutex mu_;
  std::condition_variable slot_cv_;
  std::size_t in_flight_ = 0;
  std::map<long long, Pending> pending_;
  std::exception_ptr dead_;
  std::promise<int> handshake_;
  bool handshake_done_ = false;
  std::atomic<long long> next_id_{1};
  std::atomic<bool> stop_{false};
  std::thread reader_;
};

/// Backend from a --scorer value: "uniform", "oracle", "process:<cmd>",
/// "tcp:<host:port>". Throws ConfigError for unknown specs and
/// ScorerUnavailable / ProtocolError when an external scorer cannot be used.
std::unique_ptr<Scorer> make_scorer(const std::string& spec, const Dataset& ds, StreamScorerOptions opts = {});

/// Mean of the scores of k independent contextual images of `box`.
ScoreVector averaged_score(const AnnotatedImage& image, const Box& box, int k, Rng& rng, Scorer& scorer,
                           const ContextOptions& opts = {});

/// averaged_score for many boxes, batching contextual images up to the
/// scorer's max_batch. RNG draws happen box by box, variant by variant.
std::vector<ScoreVector> averaged_scores(const AnnotatedImage& image, std::span<const Box> boxes, int k, Rng& rng,
                                         Scorer& scorer, const ContextOptions& opts = {});

}  // namespace ctxaug
