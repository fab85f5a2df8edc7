#include "mixsearch/synth.hpp"

#include <cmath>
#include <cstdio>

#include "mixsearch/error.hpp"
#include "mixsearch/random.hpp"

namespace mixsearch::synth {

namespace {

constexpr std::uint64_t kDirectionStream = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kCalibrationStream = 0xbb67ae8584caa73bULL;

std::string padded(char prefix, std::size_t i, std::size_t n) {
  std::size_t width = 4;
  for (std::size_t m = n > 0 ? n - 1 : 0; m >= 10000; m /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, static_cast<int>(width), i);
  return buf;
}

Embedding to_unit(const std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double n = std::sqrt(ss);
  Embedding out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(n > 0.0 ? v[i] / n : v[i]);
  return out;
}

// s restricted to [lo, hi) plus noise and an optional gap offset.
Embedding observe(const std::vector<double>& s, std::size_t lo, std::size_t hi, const std::vector<double>& u,
                  double gap, double sigma, Rng& rng) {
  std::vector<double> v(u.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double sem = (j >= lo && j < hi) ? s[j] : 0.0;
    v[j] = sem + sigma * rng.gaussian() + gap * u[j];
  }
  return to_unit(v);
}

std::vector<double> direction(const SynthConfig& c) {
  std::vector<double> u(c.dimension, 0.0);
  if (!c.random_gap_direction) {
    u[c.dimension - 1] = 1.0;
    return u;
  }
  Rng rng(c.seed ^ kDirectionStream);
  double ss = 0.0;
  do {
    ss = 0.0;
    for (std::size_t j = c.semantic_dim; j < c.dimension; ++j) {
      u[j] = rng.gaussian();
      ss += u[j] * u[j];
    }
  } while (ss < 1e-12);
  const double n = std::sqrt(ss);
  for (double& x : u) x /= n;
  return u;
}

SynthData draw(const SynthConfig& c, const std::vector<double>& u, std::uint64_t seed) {
  Rng rng(seed);
  SynthData out;
  out.corpus.dimension = c.dimension;
  out.corpus.documents.reserve(c.n_docs);
  const std::size_t half = c.semantic_dim / 2;
  const std::size_t text_hi = c.split_semantics ? half : c.semantic_dim;
  const std::size_t image_lo = c.split_semantics ? half : 0;
  std::vector<std::vector<double>> semantics(c.n_docs, std::vector<double>(c.dimension, 0.0));
  for (std::size_t i = 0; i < c.n_docs; ++i) {
    std::vector<double>& s = semantics[i];
    double ss = 0.0;
    do {
      ss = 0.0;
      for (std::size_t j = 0; j < c.semantic_dim; ++j) {
        s[j] = rng.gaussian();
        ss += s[j] * s[j];
      }
    } while (ss < 1e-12);
    const double n = std::sqrt(ss);
    for (std::size_t j = 0; j < c.semantic_dim; ++j) s[j] /= n;
    Embedding image = observe(s, image_lo, c.semantic_dim, u, 0.0, c.sigma, rng);
    Embedding text = observe(s, 0, text_hi, u, c.gap, c.sigma, rng);
    out.corpus.documents.push_back(Document::from_parts(
        padded('d', i, c.n_docs), {{Modality::Text, std::move(text)}, {Modality::Image, std::move(image)}}));
  }
  out.queries.reserve(c.n_queries);
  for (std::size_t i = 0; i < c.n_queries; ++i) {
    Query q{padded('q', i, c.n_queries), observe(semantics[i], 0, c.semantic_dim, u, c.gap, c.sigma, rng),
            Modality::Text};
    out.qrels.set(q.id, out.corpus.documents[i].id, 1);
    out.queries.push_back(std::move(q));
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
  if (dimension < 2) fail("dimension must be >= 2");
  if (semantic_dim == 0 || semantic_dim + 1 > dimension) fail("semantic_dim must lie in [1, dimension - 1]");
  if (split_semantics && semantic_dim < 2) fail("split semantics needs semantic_dim >= 2");
  if (n_docs == 0) fail("n_docs must be positive");
  if (n_queries == 0 || n_queries > n_docs) fail("n_queries must lie in [1, n_docs]");
  if (!(gap >= 0.0) || !std::isfinite(gap)) fail("gap must be a non-negative finite number");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail("sigma must be a non-negative finite number");
}

Embedding gap_direction(const SynthConfig& config) {
  config.validate();
  const std::vector<double> u = direction(config);
  Embedding out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = static_cast<float>(u[j]);
  return out;
}

SynthData generate(const SynthConfig& config) {
  config.validate();
  return draw(config, direction(config), config.seed);
}

SynthData generate_calibration(const SynthConfig& config, std::size_t n, std::uint64_t seed) {
  SynthConfig c = config;
  c.n_docs = n;
  c.n_queries = n;
  c.validate();
  return draw(c, direction(config), seed);
}

std::uint64_t calibration_seed(const SynthConfig& config) { return config.seed ^ kCalibrationStream; }

calibration::CalibrationMeans means_of(const SynthData& data) {
  auto records = calibration::records_from_corpus(data.corpus, data.queries);
  for (auto& r : records) r.embedding = calibration::normalize(r.embedding).embedding;
  return calibration::compute_means(records);
}

UShape ushape_experiment(const SynthConfig& config, std::span<const double> grid,
                         const corpusops::ReplacementPlan& plan, const corpusops::ExperimentOptions& options) {
  const SynthData data = generate(config);
  const calibration::CalibrationMeans means =
      means_of(generate_calibration(config, config.n_docs, calibration_seed(config)));
  UShape out;
  out.raw = corpusops::p_sweep(data.corpus, data.queries, data.qrels, grid, plan, nullptr, options);
  out.calibrated = corpusops::p_sweep(data.corpus, data.queries, data.qrels, grid, plan, &means, options);
  return out;
}

}  // namespace mixsearch::synth
