// Copyright 2026 The polydnn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "polydnn/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "polydnn/errors.h"

namespace polydnn {
namespace {

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double StdDev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

double RelativeDiff(std::span<const double> a, std::span<const double> ref) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += (a[i] - ref[i]) * (a[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

Interval InputRange(const Dataset& data) {
  Interval r{0.0, 1.0};
  bool first = true;
  for (const auto& x : data.inputs) {
    for (double v : x) {
      if (first) {
        r = {v, v};
        first = false;
      }
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  }
  if (r.hi <= r.lo) r.hi = r.lo + 1.0;
  return r;
}

ModelGraph Folded(const ModelGraph& model) {
  Validate(model);
  return model.HasBatchNorm() ? FoldBatchNorm(model) : model;
}

CompileOptions OptionsFor(const CompileSettings& s, std::vector<double> intervals) {
  CompileOptions o;
  o.degree = s.degree;
  o.intervals = std::move(intervals);
  o.pool_mode = s.pool_mode;
  o.softmax_mode = s.softmax_mode;
  o.sqrt_degree = s.sqrt_degree;
  o.limits = s.limits;
  return o;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Dataset SyntheticCalibrationSet(std::size_t input_width, std::uint64_t seed,
                                std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Dataset d;
  d.num_classes = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(input_width);
    for (double& v : x) v = dist(rng);
    d.inputs.push_back(std::move(x));
    d.labels.push_back(0);
  }
  return d;
}

std::vector<double> CalibrateModel(const ModelGraph& folded,
                                   const Dataset* calibration,
                                   const CompileSettings& settings) {
  if (calibration != nullptr) {
    return CalibrateIntervals(folded, *calibration, settings.calibration);
  }
  return CalibrateIntervals(
      folded, SyntheticCalibrationSet(folded.input_width, settings.seed),
      settings.calibration);
}

std::vector<std::size_t> SplitPseudoUnits(const ModelGraph& model,
                                          std::size_t total) {
  const auto hidden = HiddenDenseLayers(model);
  if (total > 0 && hidden.empty()) {
    throw ValidationError("model has no hidden dense layer for pseudo-units");
  }
  std::vector<std::size_t> counts(hidden.size(), 0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i] = total / counts.size() + (i < total % counts.size() ? 1 : 0);
  }
  return counts;
}

ProgramArtifact CompileModel(const ModelGraph& model, const Dataset* calibration,
                             const CompileSettings& settings) {
  const ModelGraph folded = Folded(model);
  auto intervals = CalibrateModel(folded, calibration, settings);
  ModelGraph working = folded;
  if (settings.pseudo_units > 0) {
    const auto counts = SplitPseudoUnits(folded, settings.pseudo_units);
    working = InsertPseudoUnits(folded, counts, settings.seed);
  }
  ProgramArtifact artifact;
  artifact.program = CompileNested(working, OptionsFor(settings, std::move(intervals)));
  if (settings.expand) {
    ExpandOptions eo;
    eo.limits = settings.limits;
    eo.seed = settings.seed;
    if (calibration != nullptr) eo.check_interval = InputRange(*calibration);
    artifact.expanded = Expand(artifact.program, eo);
  }
  return artifact;
}

SweepReport RunSweep(const ModelGraph& model, const Dataset& data,
                     const SweepConfig& config, const CompileSettings& base) {
  Validate(data);
  if (config.degrees.empty() || config.runs == 0 || config.samples_per_run == 0) {
    throw ValidationError("sweep needs at least one degree, run and sample");
  }
  if (!std::is_sorted(config.degrees.begin(), config.degrees.end())) {
    throw ValidationError("sweep degrees must be ascending");
  }
  if (!config.with_replacement && data.size() < config.samples_per_run) {
    throw ValidationError("dataset has " + std::to_string(data.size()) +
                          " samples, fewer than samples_per_run; sample with "
                          "replacement instead");
  }
  const ModelGraph folded = Folded(model);
  const auto intervals = CalibrateIntervals(folded, data, base.calibration);

  std::vector<std::vector<std::size_t>> samples(config.runs);
  for (std::size_t r = 0; r < config.runs; ++r) {
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(r)};
    std::mt19937_64 rng(seq);
    auto& idx = samples[r];
    if (config.with_replacement) {
      std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
      for (std::size_t i = 0; i < config.samples_per_run; ++i) idx.push_back(pick(rng));
    } else {
      idx.resize(data.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(config.samples_per_run);
    }
  }

  std::vector<Inference> reference(data.size());
  std::vector<bool> needed(data.size(), false);
  for (const auto& idx : samples) {
    for (auto i : idx) needed[i] = true;
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (needed[i]) reference[i] = ReferenceInfer(folded, data.inputs[i]);
  }

  SweepReport report;
  for (const auto& idx : samples) {
    std::size_t correct = 0;
    for (auto i : idx) correct += reference[i].predicted_class == data.labels[i];
    report.reference_accuracy_per_run.push_back(
        static_cast<double>(correct) / static_cast<double>(idx.size()));
  }

  report.rows.resize(config.degrees.size());
  ParallelFor(config.degrees.size(), config.threads, [&](std::size_t d) {
    CompileSettings s = base;
    s.degree = config.degrees[d];
    const PolyProgram program = CompileNested(folded, OptionsFor(s, intervals));
    SweepRow row;
    row.degree = s.degree;
    std::vector<double> diffs;
    std::vector<double> all_diffs;
    for (const auto& idx : samples) {
      std::size_t agree = 0;
      std::vector<double> run_diffs;
      for (auto i : idx) {
        const auto out = EvalNested(program, data.inputs[i]);
        agree += out.predicted_class == reference[i].predicted_class;
        run_diffs.push_back(RelativeDiff(out.outputs, reference[i].logits));
      }
      row.agreement_per_run.push_back(static_cast<double>(agree) /
                                      static_cast<double>(idx.size()));
      diffs.push_back(Mean(run_diffs));
      all_diffs.insert(all_diffs.end(), run_diffs.begin(), run_diffs.end());
    }
    row.agreement_mean = Mean(row.agreement_per_run);
    row.agreement_std = StdDev(row.agreement_per_run);
    row.logit_diff_mean = Mean(diffs);
    row.logit_diff_std = StdDev(diffs);
    row.logit_diff_median = Median(all_diffs);
    report.rows[d] = std::move(row);
  });
  return report;
}

void WriteSweepCsv(std::ostream& out, const SweepReport& report,
                   const SweepConfig& config) {
  out << "degree,agreement_mean,agreement_std,rel_logit_diff_mean,"
         "rel_logit_diff_std,rel_logit_diff_median,runs,samples\n";
  out << std::setprecision(10);
  for (const auto& r : report.rows) {
    out << r.degree << ',' << r.agreement_mean << ',' << r.agreement_std << ','
        << r.logit_diff_mean << ',' << r.logit_diff_std << ','
        << r.logit_diff_median << ',' << config.runs
        << ',' << config.samples_per_run << '\n';
  }
}

std::array<double, 3> LinearFit(std::span<const double> x,
                                std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("linear fit needs at least two points");
  }
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("linear fit needs distinct x values");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {intercept, slope, r2};
}

CostProfile ProfileCost(const ModelGraph& model, std::span<const int> degrees,
                        const Dataset* calibration, const CompileSettings& base,
                        std::size_t timing_repeats) {
  const ModelGraph folded = Folded(model);
  const auto intervals = CalibrateModel(folded, calibration, base);
  const Dataset inputs = calibration != nullptr
                             ? *calibration
                             : SyntheticCalibrationSet(folded.input_width, base.seed, 16);
  const auto& x0 = inputs.inputs.front();
  using Clock = std::chrono::steady_clock;
  auto time_per_call = [&](auto&& call) {
    const std::size_t n = std::min<std::size_t>(inputs.size(), 16);
    const auto start = Clock::now();
    for (std::size_t r = 0; r < timing_repeats; ++r) {
      for (std::size_t i = 0; i < n; ++i) call(inputs.inputs[i]);
    }
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    return elapsed.count() / static_cast<double>(timing_repeats * n);
  };

  CostProfile profile;
  CostRow ref;
  ReferenceInfer(folded, x0, &ref.ops);
  ref.seconds_per_inference =
      time_per_call([&](const std::vector<double>& x) { ReferenceInfer(folded, x); });
  profile.rows.push_back(ref);

  std::vector<double> xs;
  std::vector<double> ys;
  for (int d : degrees) {
    CompileSettings s = base;
    s.degree = d;
    const PolyProgram program = CompileNested(folded, OptionsFor(s, intervals));
    CostRow row;
    row.degree = d;
    EvalNested(program, x0, &row.ops);
    row.seconds_per_inference =
        time_per_call([&](const std::vector<double>& x) { EvalNested(program, x); });
    xs.push_back(d);
    ys.push_back(static_cast<double>(row.ops.total()));
    profile.rows.push_back(row);
  }
  if (xs.size() >= 2) {
    const auto fit = LinearFit(xs, ys);
    profile.intercept = fit[0];
    profile.slope = fit[1];
    profile.r_squared = fit[2];
  }
  return profile;
}

void WriteCostCsv(std::ostream& out, const CostProfile& profile) {
  out << "degree,mul,add,cmp,other,total,seconds_per_inference\n";
  out << std::setprecision(10);
  for (const auto& r : profile.rows) {
    out << r.degree << ',' << r.ops.mul << ',' << r.ops.add << ',' << r.ops.cmp
        << ',' << r.ops.other << ',' << r.ops.total() << ','
        << r.seconds_per_inference << '\n';
  }
  out << "# fit slope=" << profile.slope << " intercept=" << profile.intercept
      << " r2=" << profile.r_squared << '\n';
}

std::vector<Fx2> ClearFixedPointEval(const ExpandedNetworkPoly& poly,
                                     std::span<const double> x,
                                     const FixedPointParams& params) {
  const PublicStructure structure = StructureOf(poly);
  const auto monomials = EncodeMonomials(structure, x, params);
  const auto& field = params.field();
  std::vector<Fx2> out;
  for (std::size_t o = 0; o < poly.outputs.size(); ++o) {
    Fx2 acc{};
    std::size_t t = 0;
    for (const auto& [exps, coeff] : poly.outputs[o].terms()) {
      acc = field.Add(acc, field.Mul(EncodeFixed(coeff, params), monomials[o][t++]));
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace polydnn
