#include <cmath>
#include <numeric>

#include "tinycompress/data.hpp"
#include "tinycompress/errors.hpp"
#include "tinycompress/rng.hpp"

namespace tc::data {

namespace {

constexpr std::size_t kLatentFactors = 6;

std::vector<std::size_t> pick_features(Rng& rng, std::size_t count) {
  std::vector<std::size_t> idx(kMeasurements);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(count);
  return idx;
}

double signed_draw(Rng& rng, double lo, double hi) {
  const double m = rng.uniform(lo, hi);
  return rng.uniform() < 0.5 ? -m : m;
}

}  // namespace

SurrogateProcess surrogate_process(std::uint64_t seed) {
  Rng rng = Rng(seed).split("surrogate-base");
  SurrogateProcess p;
  p.loadings = Matrix(kMeasurements, kLatentFactors);
  for (auto& v : p.loadings.data()) v = static_cast<float>(0.5 * rng.normal());
  p.mean.resize(kMeasurements);
  p.noise.resize(kMeasurements);
  p.stddev.resize(kMeasurements);
  for (std::size_t j = 0; j < kMeasurements; ++j) {
    p.mean[j] = rng.uniform(-1.0, 1.0);
    p.noise[j] = rng.uniform(0.5, 1.0);
    double var = p.noise[j] * p.noise[j];
    for (std::size_t f = 0; f < kLatentFactors; ++f) var += static_cast<double>(p.loadings(j, f)) * p.loadings(j, f);
    p.stddev[j] = std::sqrt(var);
  }
  return p;
}

FaultSignature fault_signature(std::uint64_t seed, int fault) {
  if (fault < 0 || fault >= kFaultCount) throw ArgumentError("fault number out of range");
  const auto& info = fault_catalog()[static_cast<std::size_t>(fault)];
  const auto base = surrogate_process(seed);
  Rng rng = Rng(seed).split("surrogate-fault").split(static_cast<std::uint64_t>(fault));

  FaultSignature sig;
  sig.fault = fault;
  sig.type = info.type;
  switch (info.type) {
    case FaultType::none:
      break;
    case FaultType::step: {
      // Fault 6 (loss of the A feed) is the large, widespread step.
      const bool large = fault == 6;
      sig.features = pick_features(rng, large ? 12 : 4 + rng.below(5));
      for (auto j : sig.features) sig.magnitude.push_back(signed_draw(rng, large ? 4.0 : 1.5, large ? 5.0 : 3.0) * base.stddev[j]);
      break;
    }
    case FaultType::random_variation:
      sig.features = pick_features(rng, 5 + rng.below(4));
      sig.inflation = rng.uniform(3.0, 4.0);
      sig.magnitude.assign(sig.features.size(), sig.inflation);
      break;
    case FaultType::slow_drift:
      sig.features = pick_features(rng, 6);
      for (auto j : sig.features) sig.magnitude.push_back(signed_draw(rng, 3.0, 4.0) * base.stddev[j]);
      break;
    case FaultType::sticking:
      sig.features = pick_features(rng, 3);
      for (auto j : sig.features) sig.magnitude.push_back(base.mean[j] + signed_draw(rng, 1.0, 2.0) * base.stddev[j]);
      break;
    case FaultType::unknown: {
      auto picked = pick_features(rng, 6);
      sig.features.assign(picked.begin(), picked.begin() + 3);
      sig.inflated.assign(picked.begin() + 3, picked.end());
      for (auto j : sig.features) sig.magnitude.push_back(signed_draw(rng, 1.0, 2.0) * base.stddev[j]);
      sig.inflation = 2.5;
      break;
    }
  }
  return sig;
}

Dataset synth_te(std::uint64_t seed, std::size_t samples_per_fault) {
  if (samples_per_fault == 0) throw ArgumentError("samples_per_fault must be >= 1");
  const auto base = surrogate_process(seed);
  const auto faults = included_faults();

  Dataset ds;
  ds.features = Matrix(faults.size() * samples_per_fault, kMeasurements);
  ds.fault_labels.reserve(faults.size() * samples_per_fault);

  std::size_t row = 0;
  for (int fault : faults) {
    const auto sig = fault_signature(seed, fault);
    Rng rng = Rng(seed).split("surrogate-samples").split(static_cast<std::uint64_t>(fault));
    for (std::size_t t = 0; t < samples_per_fault; ++t, ++row) {
      double latent[kLatentFactors];
      for (auto& f : latent) f = rng.normal();
      auto x = ds.features.row(row);
      std::vector<double> v(kMeasurements);
      for (std::size_t j = 0; j < kMeasurements; ++j) {
        double s = base.mean[j] + base.noise[j] * rng.normal();
        for (std::size_t f = 0; f < kLatentFactors; ++f) s += base.loadings(j, f) * latent[f];
        v[j] = s;
      }
      const double progress = samples_per_fault > 1 ? static_cast<double>(t) / static_cast<double>(samples_per_fault - 1) : 1.0;
      switch (sig.type) {
        case FaultType::none:
          break;
        case FaultType::step:
          for (std::size_t i = 0; i < sig.features.size(); ++i) v[sig.features[i]] += sig.magnitude[i];
          break;
        case FaultType::random_variation:
          for (auto j : sig.features)
            v[j] += std::sqrt(sig.inflation * sig.inflation - 1.0) * base.stddev[j] * rng.normal();
          break;
        case FaultType::slow_drift:
          for (std::size_t i = 0; i < sig.features.size(); ++i) v[sig.features[i]] += progress * sig.magnitude[i];
          break;
        case FaultType::sticking:
          for (std::size_t i = 0; i < sig.features.size(); ++i) v[sig.features[i]] = sig.magnitude[i];
          break;
        case FaultType::unknown:
          for (std::size_t i = 0; i < sig.features.size(); ++i) v[sig.features[i]] += sig.magnitude[i];
          for (auto j : sig.inflated)
            v[j] += std::sqrt(sig.inflation * sig.inflation - 1.0) * base.stddev[j] * rng.normal();
          break;
      }
      for (std::size_t j = 0; j < kMeasurements; ++j) x[j] = static_cast<float>(v[j]);
      ds.fault_labels.push_back(fault);
    }
  }
  return ds;
}

}  // namespace tc::data
