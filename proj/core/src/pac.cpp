#include "spikeosc/pac.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "spikeosc/errors.hpp"
#include "spikeosc/random.hpp"

namespace spikeosc::osc {

namespace {

std::size_t phase_bin(double phase, std::size_t n_bins) {
  const double u = (phase + std::numbers::pi) / (2.0 * std::numbers::pi);
  auto j = static_cast<std::ptrdiff_t>(std::floor(u * static_cast<double>(n_bins)));
  // phase == pi wraps to the first bin of [-pi, pi).
  j %= static_cast<std::ptrdiff_t>(n_bins);
  if (j < 0) j += static_cast<std::ptrdiff_t>(n_bins);
  return static_cast<std::size_t>(j);
}

double mi_from_bins(std::span<const double> sums, std::span<const std::size_t> counts,
                    std::size_t* empty_bins) {
  const std::size_t n_bins = sums.size();
  std::vector<double> mean(n_bins, 0.0);
  double total = 0.0;
  std::size_t empty = 0;
  for (std::size_t j = 0; j < n_bins; ++j) {
    if (counts[j] == 0) {
      ++empty;
      continue;
    }
    mean[j] = sums[j] / static_cast<double>(counts[j]);
    total += mean[j];
  }
  if (empty_bins) *empty_bins = empty;
  if (!(total > 0.0)) return 0.0;
  double neg_entropy = 0.0;
  for (double m : mean) {
    const double p = m / total;
    if (p > 0.0) neg_entropy += p * std::log(p);
  }
  const double log_n = std::log(static_cast<double>(n_bins));
  return std::clamp((log_n + neg_entropy) / log_n, 0.0, 1.0);
}

void check_lengths(std::span<const double> phase, std::span<const double> amplitude) {
  if (phase.size() != amplitude.size()) {
    throw Error(Errc::shape_mismatch, "phase and amplitude lengths differ");
  }
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}


}  // namespace

double modulation_index(std::span<const double> phase, std::span<const double> amplitude,
                        std::size_t n_bins, std::size_t* empty_bins) {
  check_lengths(phase, amplitude);
  if (n_bins < 2) throw Error(Errc::invalid_parameter, "modulation index needs at least 2 bins");
  if (phase.size() < n_bins) {
    throw Error(Errc::too_short, "fewer samples than phase bins");
  }
  std::vector<double> sums(n_bins, 0.0);
  std::vector<std::size_t> counts(n_bins, 0);
  for (std::size_t t = 0; t < phase.size(); ++t) {
    const auto j = phase_bin(phase[t], n_bins);
    sums[j] += amplitude[t];
    ++counts[j];
  }
  return mi_from_bins(sums, counts, empty_bins);
}

double mean_vector_length(std::span<const double> phase, std::span<const double> amplitude) {
  check_lengths(phase, amplitude);
  if (phase.empty()) throw Error(Errc::too_short, "mean vector length of an empty series");
  double re = 0.0, im = 0.0;
  for (std::size_t t = 0; t < phase.size(); ++t) {
    re += amplitude[t] * std::cos(phase[t]);
    im += amplitude[t] * std::sin(phase[t]);
  }
  const double n = static_cast<double>(phase.size());
  return std::hypot(re / n, im / n);
}

std::vector<double> rotate_segments(std::span<const double> x, std::size_t k) {
  if (k > x.size()) throw Error(Errc::invalid_parameter, "cut index beyond the series");
  std::vector<double> out;
  out.reserve(x.size());
  out.insert(out.end(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end());
  out.insert(out.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

double gaussian_upper_tail(double observed, double mean, double sd) noexcept {
  return 0.5 * std::erfc((observed - mean) / (sd * std::numbers::sqrt2));
}

SurrogateTest surrogate_pvalues(std::span<const double> phase, std::span<const double> amplitude,
                                std::uint64_t seed, const SurrogateOptions& options) {
  check_lengths(phase, amplitude);
  const std::size_t T = phase.size();
  if (T < 64) throw Error(Errc::too_short, "surrogate testing needs at least 64 samples");
  if (options.n_surrogates < 2) {
    throw Error(Errc::invalid_parameter, "at least 2 surrogates are needed for a Gaussian fit");
  }
  const std::size_t n_bins = options.n_bins;

  SurrogateTest out;
  out.mi = modulation_index(phase, amplitude, n_bins, &out.empty_bins);
  out.mvl = mean_vector_length(phase, amplitude);

  std::vector<std::size_t> bin(T);
  std::vector<std::size_t> counts(n_bins, 0);
  std::vector<double> c(T), s(T);
  for (std::size_t t = 0; t < T; ++t) {
    bin[t] = phase_bin(phase[t], n_bins);
    ++counts[bin[t]];
    c[t] = std::cos(phase[t]);
    s[t] = std::sin(phase[t]);
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> cut(1, T - 1);
  std::vector<double> mi_s(options.n_surrogates), mvl_s(options.n_surrogates);
  std::vector<double> sums(n_bins);
  for (std::size_t i = 0; i < options.n_surrogates; ++i) {
    const std::size_t k = cut(rng);
    std::fill(sums.begin(), sums.end(), 0.0);
    double re = 0.0, im = 0.0;
    // Surrogate amplitude at t is amplitude[(t + k) mod T].
    for (std::size_t t = 0, src = k; t < T; ++t, ++src) {
      if (src == T) src = 0;
      const double a = amplitude[src];
      sums[bin[t]] += a;
      re += a * c[t];
      im += a * s[t];
    }
    mi_s[i] = mi_from_bins(sums, counts, nullptr);
    mvl_s[i] = std::hypot(re / static_cast<double>(T), im / static_cast<double>(T));
  }

  auto moments = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  moments(mi_s, out.mi_mean, out.mi_std);
  moments(mvl_s, out.mvl_mean, out.mvl_std);
  if (!(out.mi_std > 0.0) || !(out.mvl_std > 0.0)) {
    throw Error(Errc::degenerate_surrogate, "surrogate distribution has zero spread");
  }
  out.p_mi = gaussian_upper_tail(out.mi, out.mi_mean, out.mi_std);
  out.p_mvl = gaussian_upper_tail(out.mvl, out.mvl_mean, out.mvl_std);
  if (options.keep_distributions) {
    out.mi_surrogates = std::move(mi_s);
    out.mvl_surrogates = std::move(mvl_s);
  }
  return out;
}

SurrogateTest coupling_test(const PopulationSignal& phase_signal, const PopulationSignal& amp_signal,
                            const FrequencyBand& low, const FrequencyBand& high, std::uint64_t seed,
                            const SurrogateOptions& options) {
  if (phase_signal.normalized.size() != amp_signal.normalized.size()) {
    throw Error(Errc::shape_mismatch, "phase and amplitude signals differ in length");
  }
  const auto lo_taps = design_bandpass(low, phase_signal.fs);
  const auto hi_taps = design_bandpass(high, amp_signal.fs);
  const auto P = analytic_signal(filter_zero_phase(phase_signal.normalized, lo_taps));
  const auto A = analytic_signal(filter_zero_phase(amp_signal.normalized, hi_taps));
  const std::size_t N = P.phase.size();
  const std::size_t edge = std::max(lo_taps.size(), hi_taps.size());
  if (N < 2 * edge + 64) {
    throw Error(Errc::too_short, "too few samples left after edge exclusion");
  }
  return surrogate_pvalues(std::span(P.phase).subspan(edge, N - 2 * edge),
                           std::span(A.amplitude).subspan(edge, N - 2 * edge), seed, options);
}

std::uint64_t scenario_seed(std::uint64_t seed, std::string_view utterance_id,
                            std::size_t phase_layer, std::size_t amp_layer,
                            std::string_view low_band, std::string_view high_band) {
  return derive_seed(seed, {fnv1a(utterance_id), phase_layer, amp_layer, fnv1a(low_band),
                            fnv1a(high_band)});
}

ScanResult pac_scan(std::span<const std::optional<PopulationSignal>> layers,
                    std::span<const std::string> degenerate_reasons,
                    const std::string& utterance_id, const ScanOptions& options) {
  const std::size_t L = layers.size();
  const std::size_t n_pairs = options.low_bands.size() * options.high_bands.size();
  ScanResult result;

  // Band-limited phase and envelope per (layer, band), or the reason it is missing.
  std::vector<std::string> band_names = options.low_bands;
  band_names.insert(band_names.end(), options.high_bands.begin(), options.high_bands.end());
  struct Prepared {
    std::optional<AnalyticSignal> signal;
    std::size_t taps = 0;
    std::string reason;
  };
  std::vector<std::map<std::string, Prepared>> prepared(L);
  for (std::size_t l = 0; l < L; ++l) {
    if (!layers[l]) continue;
    for (const auto& name : band_names) {
      if (prepared[l].count(name)) continue;
      Prepared p;
      try {
        const auto taps = design_bandpass(band_by_name(name), layers[l]->fs);
        p.taps = taps.size();
        p.signal = analytic_signal(filter_zero_phase(layers[l]->normalized, taps));
      } catch (const Error& e) {
        p.reason = e.what();
      }
      prepared[l].emplace(name, std::move(p));
    }
  }

  struct Scenario {
    std::size_t phase_layer, amp_layer;
    const std::string* low;
    const std::string* high;
    std::size_t begin, end;
  };
  std::vector<Scenario> work;
  for (std::size_t p = 0; p < L; ++p) {
    for (std::size_t a = p; a < L; ++a) {
      const std::string scope = "layer " + std::to_string(p) + " -> " + std::to_string(a);
      if (!layers[p] || !layers[a]) {
        const std::size_t bad = !layers[p] ? p : a;
        const std::string reason = bad < degenerate_reasons.size() && !degenerate_reasons[bad].empty()
                                       ? degenerate_reasons[bad]
                                       : "layer " + std::to_string(bad) + " is degenerate";
        result.skips.push_back({utterance_id, scope, reason, n_pairs});
        continue;
      }
      for (const auto& lo : options.low_bands) {
        for (const auto& hi : options.high_bands) {
          const auto& P = prepared[p].at(lo);
          const auto& A = prepared[a].at(hi);
          const std::string pair_scope = scope + " " + lo + "/" + hi;
          if (!P.signal || !A.signal) {
            result.skips.push_back({utterance_id, pair_scope, !P.signal ? P.reason : A.reason, 1});
            continue;
          }
          const std::size_t N = P.signal->phase.size();
          const std::size_t edge = std::max(P.taps, A.taps);
          if (N < 2 * edge + 64) {
            result.skips.push_back(
                {utterance_id, pair_scope, "too_short: too few samples left after edge exclusion", 1});
            continue;
          }
          work.push_back({p, a, &lo, &hi, edge, N - edge});
        }
      }
    }
  }

  std::vector<CouplingRecord> records(work.size());
  std::vector<std::string> failures(work.size());
  detail::parallel_for(work.size(), options.threads, [&](std::size_t i) {
    const auto& w = work[i];
    const auto& P = *prepared[w.phase_layer].at(*w.low).signal;
    const auto& A = *prepared[w.amp_layer].at(*w.high).signal;
    const std::span<const double> phase(P.phase.data() + w.begin, w.end - w.begin);
    const std::span<const double> amp(A.amplitude.data() + w.begin, w.end - w.begin);
    CouplingRecord r;
    r.utterance_id = utterance_id;
    r.phase_layer = w.phase_layer;
    r.amp_layer = w.amp_layer;
    r.low_band = *w.low;
    r.high_band = *w.high;
    try {
      SurrogateOptions so = options.surrogates;
      so.keep_distributions = false;
      const auto test = surrogate_pvalues(
          phase, amp,
          scenario_seed(options.seed, utterance_id, w.phase_layer, w.amp_layer, *w.low, *w.high),
          so);
      r.mi = test.mi;
      r.mvl = test.mvl;
      r.p_mi = test.p_mi;
      r.p_mvl = test.p_mvl;
      r.empty_bins = test.empty_bins;
      r.significant = r.p_mi < 0.05 && r.p_mvl < 0.05;
    } catch (const Error& e) {
      failures[i] = e.what();
    }
    records[i] = std::move(r);
  });
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!failures[i].empty()) {
      const auto& w = work[i];
      result.skips.push_back({utterance_id,
                              "layer " + std::to_string(w.phase_layer) + " -> " +
                                  std::to_string(w.amp_layer) + " " + *w.low + "/" + *w.high,
                              failures[i], 1});
    } else {
      result.records.push_back(std::move(records[i]));
    }
  }
  return result;
}

ScanResult pac_scan(std::span<const Matrix<std::uint8_t>> rasters, double dt_ms,
                    const std::string& utterance_id, const ScanOptions& options) {
  std::vector<std::optional<PopulationSignal>> signals(rasters.size());
  std::vector<std::string> reasons(rasters.size());
  for (std::size_t l = 0; l < rasters.size(); ++l) {
    try {
      signals[l] = population_signal(rasters[l], dt_ms, l);
    } catch (const Error& e) {
      reasons[l] = e.what();
    }
  }
  return pac_scan(signals, reasons, utterance_id, options);
}

ScanSummary summarize(std::span<const CouplingRecord> records, std::span<const ScanSkip> skips) {
  ScanSummary s;
  s.rows = records.size();
  for (const auto& k : skips) s.skipped_rows += k.scenarios;
  for (const auto& r : records) {
    auto& count = s.per_band_counts[r.low_band + "/" + r.high_band];
    if (!r.significant) continue;
    ++count;
    if (r.intra()) {
      ++s.intra_total;
    } else {
      ++s.inter_total;
    }
  }
  return s;
}

void write_coupling_csv(const std::filesystem::path& path, std::span<const CouplingRecord> records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error(Errc::io, "cannot write " + path.string());
  os << "utterance_id,phase_layer,amp_layer,low_band,high_band,mi,mvl,p_mi,p_mvl,significant,"
        "empty_bins\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : records) {
    if (r.utterance_id.find_first_of(",\n") != std::string::npos) {
      throw Error(Errc::format, "utterance id '" + r.utterance_id + "' contains a separator");
    }
    os << r.utterance_id << ',' << r.phase_layer << ',' << r.amp_layer << ',' << r.low_band << ','
       << r.high_band << ',' << num(r.mi) << ',' << num(r.mvl) << ',' << num(r.p_mi) << ','
       << num(r.p_mvl) << ',' << (r.significant ? 1 : 0) << ',' << r.empty_bins << '\n';
  }
  if (!os) throw Error(Errc::io, "short write to " + path.string());
}

std::vector<CouplingRecord> read_coupling_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  std::vector<CouplingRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw Error(Errc::format, "malformed coupling row: " + line);
    CouplingRecord r;
    r.utterance_id = f[0];
    r.phase_layer = std::stoul(f[1]);
    r.amp_layer = std::stoul(f[2]);
    r.low_band = f[3];
    r.high_band = f[4];
    r.mi = std::stod(f[5]);
    r.mvl = std::stod(f[6]);
    r.p_mi = std::stod(f[7]);
    r.p_mvl = std::stod(f[8]);
    r.significant = f[9] == "1";
    r.empty_bins = std::stoul(f[10]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace spikeosc::osc
