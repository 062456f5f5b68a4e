// Copyright 2026 The qdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdsim/characterize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace qdsim {
namespace {

constexpr std::size_t kMinSamples = 8;
// An oscillating model has to remove at least this share of the residual
// left by the best non-oscillating one.
constexpr double kOscillationGain = 0.5;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_number(std::string_view cell, std::size_t line) {
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(line, "expected a finite number, got '" + std::string(cell) + "'");
  }
  return value;
}

void check_series(std::span<const double> t, std::span<const double> y) {
  require(t.size() == y.size(), ErrorKind::kInvalidArgument,
          "time and value series differ in length");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(std::isfinite(t[i]) && std::isfinite(y[i]), ErrorKind::kInvalidArgument,
            "series contains non-finite samples");
    require(i == 0 || t[i] > t[i - 1], ErrorKind::kInvalidArgument,
            "sample times must be strictly ascending");
  }
  require(t.size() >= kMinSamples, ErrorKind::kDegenerateSignal,
          "need at least " + std::to_string(kMinSamples) + " samples, got " +
              std::to_string(t.size()));
}

bool is_flat(std::span<const double> y) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return (*hi - *lo) <= 1e-12 * std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)));
}

struct LinearFit {
  RVector coefficients;
  double rss = std::numeric_limits<double>::infinity();
};

// Normal equations: the scan only seeds the nonlinear refinement, and the
// bases have at most three well-separated columns.
LinearFit least_squares(const RMatrix& basis, const RVector& y) {
  LinearFit fit;
  const RMatrix gram = basis.transpose() * basis;
  fit.coefficients = gram.ldlt().solve(basis.transpose() * y);
  if (!fit.coefficients.allFinite()) fit.coefficients = basis.colPivHouseholderQr().solve(y);
  fit.rss = (basis * fit.coefficients - y).squaredNorm();
  return fit;
}

/// Residual r(p) = model(p) - y and Jacobian for a parameter vector.
template <typename Model>
void residual_and_jacobian(const Model& model, const RVector& p, std::span<const double> t,
                           std::span<const double> y, RVector& r, RMatrix& j) {
  const auto n = static_cast<Eigen::Index>(t.size());
  r.resize(n);
  j.resize(n, p.size());
  RVector grad(p.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i) = model(p, t[static_cast<std::size_t>(i)], grad) - y[static_cast<std::size_t>(i)];
    j.row(i) = grad.transpose();
  }
}

/// Levenberg-Marquardt damped Gauss-Newton. Returns (iterations, converged).
template <typename Model>
std::pair<int, bool> refine(const Model& model, RVector& p, std::span<const double> t,
                            std::span<const double> y, const FitOptions& opt) {
  RVector r, r_trial;
  RMatrix j, j_trial;
  residual_and_jacobian(model, p, t, y, r, j);
  double rss = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    const RMatrix jtj = j.transpose() * j;
    const RVector jtr = j.transpose() * r;
    bool accepted = false;
    RVector step;
    while (lambda < 1e16) {
      RMatrix damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      step = damped.ldlt().solve(-jtr);
      const RVector trial = p + step;
      residual_and_jacobian(model, trial, t, y, r_trial, j_trial);
      const double rss_trial = r_trial.squaredNorm();
      if (std::isfinite(rss_trial) && rss_trial <= rss) {
        p = trial;
        r.swap(r_trial);
        j.swap(j_trial);
        rss = rss_trial;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) return {iter, true};  // no downhill step left at any damping
    if (step.norm() <= opt.relative_tolerance * (p.norm() + opt.relative_tolerance)) {
      return {iter, true};
    }
  }
  return {opt.max_iterations, false};
}

double damped_cosine(const RVector& p, double t, RVector& grad) {
  // p = (A, gamma, omega, phi, c)
  const double e = std::exp(-p(1) * t);
  const double arg = p(2) * t + p(3);
  const double c = std::cos(arg);
  const double s = std::sin(arg);
  grad(0) = e * c;
  grad(1) = -t * p(0) * e * c;
  grad(2) = -t * p(0) * e * s;
  grad(3) = -p(0) * e * s;
  grad(4) = 1.0;
  return p(0) * e * c + p(4);
}

double decaying_exponential(const RVector& p, double t, RVector& grad) {
  // p = (A, gamma, c)
  const double e = std::exp(-p(1) * t);
  grad(0) = e;
  grad(1) = -t * p(0) * e;
  grad(2) = 1.0;
  return p(0) * e + p(2);
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * std::numbers::pi);
  return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

template <typename Model>
double rms_of(const Model& model, const RVector& p, std::span<const double> t,
              std::span<const double> y) {
  RVector grad(p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = model(p, t[i], grad) - y[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(t.size()));
}

RMatrix envelope_basis(std::span<const double> t, double gamma, double omega, bool oscillating) {
  const auto n = static_cast<Eigen::Index>(t.size());
  RMatrix basis(n, oscillating ? 3 : 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = t[static_cast<std::size_t>(i)];
    const double e = std::exp(-gamma * ti);
    if (oscillating) {
      basis(i, 0) = e * std::cos(omega * ti);
      basis(i, 1) = e * std::sin(omega * ti);
      basis(i, 2) = 1.0;
    } else {
      basis(i, 0) = e;
      basis(i, 1) = 1.0;
    }
  }
  return basis;
}

}  // namespace

void CharacterizationGrid::validate() const {
  require(!voltages.empty() && !times.empty(), ErrorKind::kInvalidArgument,
          "characterization grid needs at least one voltage and one time");
  require(amplitudes.rows() == static_cast<Eigen::Index>(voltages.size()) &&
              amplitudes.cols() == static_cast<Eigen::Index>(times.size()),
          ErrorKind::kInvalidArgument, "amplitude matrix shape does not match the axes");
  for (std::size_t i = 1; i < voltages.size(); ++i) {
    require(voltages[i] > voltages[i - 1], ErrorKind::kInvalidArgument,
            "voltage axis must be strictly ascending");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    require(times[i] > times[i - 1], ErrorKind::kInvalidArgument,
            "time axis must be strictly ascending");
  }
  require(amplitudes.allFinite(), ErrorKind::kInvalidArgument, "amplitudes must be finite");
}

CharacterizationGrid parse_grid(std::istream& in) {
  CharacterizationGrid grid;
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto cells = split_cells(line);
    if (!have_header) {
      if (cells.front() != "time") {
        throw ParseError(line_no, "header must start with 'time'");
      }
      if (cells.size() < 2) throw ParseError(line_no, "header lists no sample times");
      for (std::size_t c = 1; c < cells.size(); ++c) {
        const double t = parse_number(cells[c], line_no);
        if (!grid.times.empty() && t <= grid.times.back()) {
          throw ParseError(line_no, "time axis must be strictly ascending");
        }
        grid.times.push_back(t);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != grid.times.size() + 1) {
      throw ParseError(line_no, "expected " + std::to_string(grid.times.size() + 1) +
                                    " cells, got " + std::to_string(cells.size()));
    }
    const double v = parse_number(cells[0], line_no);
    if (!grid.voltages.empty() && v <= grid.voltages.back()) {
      throw ParseError(line_no, "voltage axis must be strictly ascending");
    }
    grid.voltages.push_back(v);
    std::vector<double> row;
    row.reserve(grid.times.size());
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const double a = parse_number(cells[c], line_no);
      if (std::abs(a) > 1.0) {
        throw ParseError(line_no, "amplitudes must be normalised to [-1, 1]");
      }
      row.push_back(a);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(line_no, "missing 'time,...' header");
  if (rows.empty()) throw ParseError(line_no, "no voltage rows");
  grid.amplitudes.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(grid.times.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < grid.times.size(); ++c) {
      grid.amplitudes(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  grid.validate();
  return grid;
}

CharacterizationGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open characterization grid '" + path.string() + "'");
  return parse_grid(in);
}

void write_grid(std::ostream& out, const CharacterizationGrid& grid) {
  grid.validate();
  out << std::setprecision(17) << "time";
  for (double t : grid.times) out << ',' << t;
  out << '\n';
  for (std::size_t r = 0; r < grid.voltages.size(); ++r) {
    out << grid.voltages[r];
    for (Eigen::Index c = 0; c < grid.amplitudes.cols(); ++c) {
      out << ',' << grid.amplitudes(static_cast<Eigen::Index>(r), c);
    }
    out << '\n';
  }
}

double DampedSinusoidFit::evaluate(double t) const {
  return amplitude * std::exp(-t / decay_time) * std::cos(angular_frequency * t + phase) + offset;
}

DampedSinusoidFit fit_damped_sinusoid(std::span<const double> times,
                                      std::span<const double> values, const FitOptions& options) {
  check_series(times, values);
  require(!is_flat(values), ErrorKind::kDegenerateSignal, "signal is constant; no oscillation");
  const double span = times.back() - times.front();
  const RVector y = Eigen::Map<const RVector>(values.data(), static_cast<Eigen::Index>(values.size()));

  const double trial_rates[] = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
  double flat_rss = std::numeric_limits<double>::infinity();
  for (double rate : trial_rates) {
    flat_rss = std::min(flat_rss, least_squares(envelope_basis(times, rate / span, 0.0, false), y).rss);
  }

  // Scan from half a period over the record up to the median-spacing Nyquist
  // frequency, at a quarter of the natural Fourier resolution.
  std::vector<double> gaps(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) gaps[i - 1] = times[i] - times[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  const double nyquist = std::numbers::pi / gaps[gaps.size() / 2];
  const double omega_lo = std::numbers::pi / span;
  const double omega_step = omega_lo / 4.0;
  const int n_omega = std::max(2, static_cast<int>(std::ceil((nyquist - omega_lo) / omega_step)) + 1);

  // Per candidate, solve the 3x3 normal equations of the basis
  // [e cos(wt), e sin(wt), 1] from accumulated sums.
  const std::size_t n = times.size();
  std::vector<std::vector<double>> envelopes;
  for (double rate : trial_rates) {
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-rate / span * times[i]);
    envelopes.push_back(std::move(e));
  }
  const double y_sum = y.sum();
  const double y_sq = y.squaredNorm();
  std::vector<double> cs(n), sn(n);
  double best_rss = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_coefficients = Eigen::Vector3d::Zero();
  double best_omega = 0.0;
  double best_rate = 0.0;
  int best_index = -1;
  for (int w = 0; w < n_omega; ++w) {
    const double omega = omega_lo + w * omega_step;
    for (std::size_t i = 0; i < n; ++i) {
      cs[i] = std::cos(omega * times[i]);
      sn[i] = std::sin(omega * times[i]);
    }
    for (std::size_t r = 0; r < envelopes.size(); ++r) {
      const std::vector<double>& e = envelopes[r];
      double scc = 0, scs = 0, sss = 0, sc = 0, ss = 0, yc = 0, ys = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double c = e[i] * cs[i], s = e[i] * sn[i];
        scc += c * c;
        scs += c * s;
        sss += s * s;
        sc += c;
        ss += s;
        yc += values[i] * c;
        ys += values[i] * s;
      }
      Eigen::Matrix3d gram;
      gram << scc, scs, sc, scs, sss, ss, sc, ss, static_cast<double>(n);
      const Eigen::Vector3d rhs(yc, ys, y_sum);
      const Eigen::Vector3d x = gram.ldlt().solve(rhs);
      const double rss = y_sq - x.dot(rhs);
      if (x.allFinite() && rss < best_rss) {
        best_rss = rss;
        best_coefficients = x;
        best_omega = omega;
        best_rate = trial_rates[r] / span;
        best_index = w;
      }
    }
  }
  require(best_index > 0 && best_rss < kOscillationGain * flat_rss, ErrorKind::kDegenerateSignal,
          "no oscillation detected: best frequency is indistinguishable from zero");

  RVector p(5);
  const double a = best_coefficients(0);
  const double b = best_coefficients(1);
  p << std::hypot(a, b), best_rate, best_omega, std::atan2(-b, a), best_coefficients(2);
  const auto [iterations, converged] = refine(damped_cosine, p, times, values, options);

  DampedSinusoidFit fit;
  double amplitude = p(0), omega = p(2), phase = p(3);
  if (omega < 0.0) {
    omega = -omega;
    phase = -phase;
  }
  if (amplitude < 0.0) {
    amplitude = -amplitude;
    phase += std::numbers::pi;
  }
  require(p(1) > 0.0, ErrorKind::kDegenerateSignal, "fitted envelope does not decay");
  fit.amplitude = amplitude;
  fit.decay_time = 1.0 / p(1);
  fit.angular_frequency = omega;
  fit.phase = wrap_phase(phase);
  fit.offset = p(4);
  fit.residual_rms = rms_of(damped_cosine, p, times, values);
  fit.iterations = iterations;
  fit.converged = converged;
  return fit;
}

DampedSinusoidFit fit_exponential_decay(std::span<const double> times,
                                        std::span<const double> values,
                                        const FitOptions& options) {
  check_series(times, values);
  require(!is_flat(values), ErrorKind::kDegenerateSignal, "signal is constant; no decay");
  const double span = times.back() - times.front();
  const RVector y = Eigen::Map<const RVector>(values.data(), static_cast<Eigen::Index>(values.size()));

  // Log-spaced decay-rate scan from 0.01 to 100 inverse record lengths.
  LinearFit best;
  double best_rate = 0.0;
  constexpr int kRates = 81;
  for (int i = 0; i < kRates; ++i) {
    const double rate = std::pow(10.0, -2.0 + 4.0 * i / (kRates - 1)) / span;
    LinearFit fit = least_squares(envelope_basis(times, rate, 0.0, false), y);
    if (fit.rss < best.rss) {
      best = std::move(fit);
      best_rate = rate;
    }
  }
  RVector p(3);
  p << best.coefficients(0), best_rate, best.coefficients(1);
  const auto [iterations, converged] = refine(decaying_exponential, p, times, values, options);
  require(p(1) > 0.0, ErrorKind::kDegenerateSignal, "fitted envelope does not decay");

  DampedSinusoidFit fit;
  fit.amplitude = p(0);
  fit.decay_time = 1.0 / p(1);
  fit.offset = p(2);
  fit.residual_rms = rms_of(decaying_exponential, p, times, values);
  fit.iterations = iterations;
  fit.converged = converged;
  return fit;
}

DecayReport extract_decay_times(const CharacterizationGrid& grid, double voltage,
                                const FitOptions& options) {
  grid.validate();
  require(std::isfinite(voltage) && voltage >= grid.voltages.front() &&
              voltage <= grid.voltages.back(),
          ErrorKind::kInvalidArgument,
          "voltage " + std::to_string(voltage) + " lies outside the grid range");
  std::size_t row = 0;
  for (std::size_t r = 1; r < grid.voltages.size(); ++r) {
    // Strict comparison keeps the lower voltage on ties.
    if (std::abs(grid.voltages[r] - voltage) < std::abs(grid.voltages[row] - voltage)) row = r;
  }
  const RVector series = grid.amplitudes.row(static_cast<Eigen::Index>(row)).transpose();
  DecayReport report;
  report.row = row;
  report.voltage_used = grid.voltages[row];
  report.fit = fit_damped_sinusoid(grid.times, std::span<const double>(series.data(), grid.times.size()),
                                   options);
  report.t2 = report.fit.decay_time;
  return report;
}

RelaxationReport extract_relaxation_time(std::span<const double> times,
                                         std::span<const double> values,
                                         const FitOptions& options) {
  RelaxationReport report;
  report.fit = fit_exponential_decay(times, values, options);
  report.t1 = report.fit.decay_time;
  return report;
}

}  // namespace qdsim
