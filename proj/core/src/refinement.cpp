#include "ovf/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ovf/errors.hpp"
#include "ovf/stationarity.hpp"

namespace ovf {

namespace {

double horner(const std::vector<double>& c, double w) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * w + *it;
  return s;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

std::size_t degree(const std::vector<double>& c) {
  std::size_t d = c.size() - 1;
  while (d > 0 && c[d] == 0.0) --d;
  return d;
}

double bisect(const std::vector<double>& c, double level, double a, double b) {
  double fa = horner(c, a) - level;
  while (b - a > 1e-12) {
    const double m = 0.5 * (a + b);
    const double fm = horner(c, m) - level;
    if (fm == 0.0) return m;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Roots of c(w) = level on [a, b]: exact for degree <= 1, otherwise split at
// the critical points (recursively) and bisect each monotone stretch.
void roots_in(const std::vector<double>& c, double level, double a, double b,
              std::vector<double>& out) {
  const std::size_t d = degree(c);
  if (d == 0) return;
  if (d == 1) {
    const double w = (level - c[0]) / c[1];
    if (w > a && w < b) out.push_back(w);
    return;
  }
  std::vector<double> crit;
  roots_in(derivative(c), 0.0, a, b, crit);
  std::sort(crit.begin(), crit.end());
  std::vector<double> knots = {a};
  knots.insert(knots.end(), crit.begin(), crit.end());
  knots.push_back(b);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = knots[i], hi = knots[i + 1];
    const double flo = horner(c, lo) - level, fhi = horner(c, hi) - level;
    if (flo == 0.0 && lo > a) out.push_back(lo);
    if ((flo < 0.0 && fhi > 0.0) || (flo > 0.0 && fhi < 0.0)) {
      out.push_back(bisect(c, level, lo, hi));
    }
  }
}

}  // namespace

// --- piecewise polynomials ------------------------------------------------

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breaks,
                                         std::vector<std::vector<double>> coeffs)
    : breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
  if (breaks_.size() < 2) throw ConstructionError("piecewise polynomial: need >= 2 breakpoints");
  if (breaks_.front() != 0.0 || breaks_.back() != 1.0) {
    throw ConstructionError("piecewise polynomial: breakpoints must start at 0 and end at 1");
  }
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    if (!(breaks_[i] < breaks_[i + 1])) {
      throw ConstructionError("piecewise polynomial: breakpoints must increase strictly");
    }
  }
  if (coeffs_.size() + 1 != breaks_.size()) {
    throw ConstructionError("piecewise polynomial: one coefficient list per piece required");
  }
  for (const auto& c : coeffs_) {
    if (c.empty()) throw ConstructionError("piecewise polynomial: empty coefficient list");
    for (double x : c) {
      if (!std::isfinite(x)) throw ConstructionError("piecewise polynomial: non-finite coefficient");
    }
  }
}

PiecewisePolynomial PiecewisePolynomial::constant(double c) { return {{0.0, 1.0}, {{c}}}; }

PiecewisePolynomial PiecewisePolynomial::linear(double c0, double c1) {
  return {{0.0, 1.0}, {{c0, c1}}};
}

std::size_t PiecewisePolynomial::piece_of(double w) const {
  const auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, w);
  return static_cast<std::size_t>(it - (breaks_.begin() + 1));
}

double PiecewisePolynomial::operator()(double w) const { return eval_piece(piece_of(w), w); }

double PiecewisePolynomial::eval_piece(std::size_t i, double w) const {
  return horner(coeffs_[i], w);
}

double PiecewisePolynomial::integral_piece(std::size_t i, double a, double b) const {
  // Shift to p(a + s) so short intervals do not cancel catastrophically.
  std::vector<double> d = coeffs_[i];
  const std::size_t m = d.size();
  for (std::size_t k = 0; k + 1 < m; ++k) {
    for (std::size_t j = m - 1; j > k; --j) d[j - 1] += a * d[j];
  }
  const double h = b - a;
  double s = 0.0;
  for (std::size_t j = m; j-- > 0;) s = s * h + d[j] / static_cast<double>(j + 1);
  return s * h;
}

double PiecewisePolynomial::integral(double a, double b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < pieces(); ++i) {
    const double lo = std::max(a, breaks_[i]), hi = std::min(b, breaks_[i + 1]);
    if (hi > lo) s += integral_piece(i, lo, hi);
  }
  return s;
}

std::vector<double> PiecewisePolynomial::crossings(double level) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < pieces(); ++i) {
    roots_in(coeffs_[i], level, breaks_[i], breaks_[i + 1], out);
  }
  return out;
}

double PiecewisePolynomial::max_value() const {
  double m = -INFINITY;
  for (std::size_t i = 0; i < pieces(); ++i) {
    std::vector<double> pts = {breaks_[i], breaks_[i + 1]};
    roots_in(derivative(coeffs_[i]), 0.0, breaks_[i], breaks_[i + 1], pts);
    for (double w : pts) m = std::max(m, eval_piece(i, w));
  }
  return m;
}

double PiecewisePolynomial::min_value() const {
  double m = INFINITY;
  for (std::size_t i = 0; i < pieces(); ++i) {
    std::vector<double> pts = {breaks_[i], breaks_[i + 1]};
    roots_in(derivative(coeffs_[i]), 0.0, breaks_[i], breaks_[i + 1], pts);
    for (double w : pts) m = std::min(m, eval_piece(i, w));
  }
  return m;
}

std::complex<double> PhaseModulusField::operator()(double w) const {
  const std::size_t i = modulus.piece_of(w);
  return std::polar(modulus.eval_piece(i, w), phase[i]);
}

// --- profiles -------------------------------------------------------------

std::vector<double> ScalarFieldProfile::all_breaks() const {
  std::vector<double> b;
  for (const auto* f : {&rho11, &rho22, &r21, &r12, &phi12.modulus}) {
    b.insert(b.end(), f->breaks().begin(), f->breaks().end());
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

std::optional<std::string> ScalarFieldProfile::invariant_violation(std::size_t grid) const {
  if (phi12.phase.size() != phi12.modulus.pieces()) {
    return "phi12: one phase per modulus piece required";
  }
  for (const auto* f : {&rho11, &rho22, &r21, &r12, &phi12.modulus}) {
    if (f->pieces() == 0) return "profile field has no pieces";
  }
  std::vector<double> pts = all_breaks();
  for (std::size_t i = 0; i <= grid; ++i) pts.push_back(static_cast<double>(i) / grid);
  for (double w : pts) {
    // Both one-sided values at breakpoints.
    for (double x : {std::nextafter(w, -1.0), w}) {
      if (x < 0.0) continue;
      const double a = rho11(x), b = rho22(x), c = r21(x), d = r12(x), m = phi12.abs(x);
      std::ostringstream at;
      at << " at w = " << x;
      if (a < -1e-12 || b < -1e-12 || c < -1e-12 || d < -1e-12) {
        return "negative density" + at.str();
      }
      if (m < -1e-12) return "negative phi12 modulus" + at.str();
      const double t = a + b;
      if (std::abs(d + c - t) > 1e-12 * std::max(1.0, t)) {
        return "sum rule r12 + r21 = rho11 + rho22 fails" + at.str();
      }
      if (m * m * t * t > d * c * a * b + 1e-12 * std::max(1.0, t * t * t * t)) {
        return "estimate |phi12|^2 (rho11 + rho22)^2 <= r12 r21 rho11 rho22 fails" + at.str();
      }
    }
  }
  return std::nullopt;
}

void ScalarFieldProfile::validate() const {
  if (auto bad = invariant_violation()) throw ConstructionError("profile: " + *bad);
}

double ScalarFieldProfile::phi_limit(double w) const {
  return phi0(r21(w), rho22(w), phi12.abs(w));
}

// --- partitions -----------------------------------------------------------

std::size_t Partition::cell_at(double w) const {
  auto it = std::upper_bound(pieces.begin(), pieces.end(), w,
                             [](double x, const Piece& p) { return x < p.b; });
  if (it == pieces.end()) --it;
  return it->cell;
}

double Partition::total_measure() const {
  double s = 0.0;
  for (const auto& c : cells) s += c.measure;
  return s;
}

namespace {

constexpr double kCutMerge = 1e-12;

long bin_of(double v, int n, double sup) {
  const double x = v * n;
  long t = static_cast<long>(std::floor(x));
  // The topmost bin is closed at the field's supremum.
  if (v >= sup && x == std::floor(x) && t > 0) --t;
  return std::max(0L, t);
}

void add_crossings(const PiecewisePolynomial& f, int n, std::vector<double>& cuts) {
  const double hi = f.max_value(), lo = f.min_value();
  const long t0 = std::max(1L, static_cast<long>(std::floor(lo * n)));
  const long t1 = static_cast<long>(std::ceil(hi * n));
  for (long t = t0; t <= t1; ++t) {
    for (double w : f.crossings(static_cast<double>(t) / n)) cuts.push_back(w);
  }
}

}  // namespace

Partition build_partition(const ScalarFieldProfile& p, int n) {
  if (n < 1) throw ConstructionError("build_partition: level must be >= 1");
  std::vector<double> cuts = p.all_breaks();
  const std::array<const PiecewisePolynomial*, 4> binned = {&p.rho11, &p.r21, &p.phi12.modulus,
                                                            &p.rho22};
  std::array<double, 4> sup{};
  for (std::size_t f = 0; f < 4; ++f) {
    add_crossings(*binned[f], n, cuts);
    sup[f] = binned[f]->max_value();
  }
  std::sort(cuts.begin(), cuts.end());
  // Crossings that agree up to round-off (e.g. rho22 = 1 - rho11) are one cut.
  std::vector<double> merged = {0.0};
  for (double w : cuts) {
    if (w - merged.back() > kCutMerge) merged.push_back(w);
  }
  if (1.0 - merged.back() <= kCutMerge) merged.back() = 1.0;
  else merged.push_back(1.0);
  cuts = std::move(merged);

  Partition part;
  part.level = n;
  std::map<std::array<long, 4>, std::size_t> lookup;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    std::array<long, 4> key;
    for (std::size_t f = 0; f < 4; ++f) key[f] = bin_of((*binned[f])(mid), n, sup[f]);
    auto [it, inserted] = lookup.try_emplace(key, part.cells.size());
    if (inserted) {
      Cell c;
      c.index = key;
      part.cells.push_back(c);
    }
    part.cells[it->second].intervals.emplace_back(a, b);
    part.pieces.push_back({a, b, it->second});
  }

  for (Cell& c : part.cells) {
    double len = 0.0, i11 = 0.0, i22 = 0.0, i21 = 0.0, i12 = 0.0, imod = 0.0;
    std::complex<double> iphi = 0.0;
    for (const auto& [a, b] : c.intervals) {
      len += b - a;
      i11 += p.rho11.integral(a, b);
      i22 += p.rho22.integral(a, b);
      i21 += p.r21.integral(a, b);
      i12 += p.r12.integral(a, b);
      const auto& mod = p.phi12.modulus;
      for (std::size_t k = 0; k < mod.pieces(); ++k) {
        const double lo = std::max(a, mod.breaks()[k]), hi = std::min(b, mod.breaks()[k + 1]);
        if (hi <= lo) continue;
        const double m = mod.integral_piece(k, lo, hi);
        imod += m;
        iphi += std::polar(m, p.phi12.phase[k]);
      }
    }
    c.measure = len;
    c.rho11 = i11 / len;
    c.rho22 = i22 / len;
    c.r21 = i21 / len;
    c.r12 = i12 / len;
    c.phi12_abs = imod / len;
    c.phi12 = iphi / len;
  }
  return part;
}

SimpleFunction phi_delta(const Partition& part) {
  SimpleFunction f;
  f.partition = &part;
  for (const Cell& c : part.cells) f.values.push_back(phi0(c.r21, c.rho22, c.phi12_abs));
  return f;
}

// --- convergence ----------------------------------------------------------

bool ConvergenceReport::bounds_ok() const {
  if (limit_infeasible != 0) return false;
  if (integral_limit > integral_dominant + 1e-12) return false;
  for (const auto& l : levels) {
    if (l.bound_violations || l.oscillation_violations || l.domination_violations) return false;
    if (l.measure_defect > 1e-12) return false;
  }
  return true;
}

namespace {

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 8> kGaussX = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussW = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

constexpr int kSamplesPerPiece = 16;
constexpr int kQuadSubdivisions = 4;

}  // namespace

ConvergenceReport convergence_report(const ScalarFieldProfile& p, const std::vector<int>& levels) {
  p.validate();
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) {
      throw ConstructionError("convergence_report: levels must be strictly ascending");
    }
  }
  ConvergenceReport rep;
  for (int n : levels) {
    const Partition part = build_partition(p, n);
    const SimpleFunction f = phi_delta(part);
    LevelReport L;
    L.level = n;
    L.cells = part.cells.size();
    L.measure_defect = std::abs(part.total_measure() - 1.0);
    const double inv_n = 1.0 / n;

    for (std::size_t k = 0; k < part.cells.size(); ++k) {
      const Cell& c = part.cells[k];
      const double v = f.values[k];
      const double scale = std::max(1.0, c.rho11 + c.rho22);
      const double lower = std::max(0.0, c.r21 - c.rho22);
      const double upper = std::min(c.rho11, c.r21);
      if (v < lower - 1e-12 * scale || v > upper + 1e-12 * scale) ++L.bound_violations;
    }

    for (const auto& piece : part.pieces) {
      const Cell& c = part.cells[piece.cell];
      const double v = f.values[piece.cell];
      const double h = piece.b - piece.a;
      for (int s = 0; s <= kSamplesPerPiece; ++s) {
        // Endpoints nudged inside so one-sided values are used.
        double w = piece.a + h * s / kSamplesPerPiece;
        if (s == 0) w = std::nextafter(piece.a, piece.b);
        if (s == kSamplesPerPiece) w = std::nextafter(piece.b, piece.a);
        const double a11 = p.rho11(w), a21 = p.r21(w), am = p.phi12.abs(w), a22 = p.rho22(w);
        const double slack = 1e-12 * std::max(1.0, a11 + a22);
        if (std::abs(a11 - c.rho11) >= inv_n + slack || std::abs(a21 - c.r21) >= inv_n + slack ||
            std::abs(am - c.phi12_abs) >= inv_n + slack ||
            std::abs(a22 - c.rho22) >= inv_n + slack) {
          ++L.oscillation_violations;
        }
        if (v > std::min(a11, a21) + 2.0 * inv_n) ++L.domination_violations;
        L.sup_error = std::max(L.sup_error, std::abs(v - p.phi_limit(w)));
      }
      const double sub = h / kQuadSubdivisions;
      for (int q = 0; q < kQuadSubdivisions; ++q) {
        const double lo = piece.a + q * sub;
        for (std::size_t g = 0; g < kGaussX.size(); ++g) {
          const double w = lo + 0.5 * sub * (kGaussX[g] + 1.0);
          L.l1_error += 0.5 * sub * kGaussW[g] * std::abs(v - p.phi_limit(w));
        }
      }
    }
    rep.levels.push_back(L);
  }

  // Limit feasibility and integrability on a fixed grid, midpoint rule for the integrals.
  constexpr int kGrid = 8192;
  for (int i = 0; i < kGrid; ++i) {
    const double w = (i + 0.5) / kGrid;
    FactorData d;
    d.rho11 = p.rho11(w);
    d.rho22 = p.rho22(w);
    d.r21 = p.r21(w);
    d.r12 = p.r12(w);
    d.phi12 = p.phi12(w);
    const double phi = p.phi_limit(w);
    const Feasibility fe = check_feasibility(d, phi);
    const double t = std::max(1.0, d.trace());
    if (fe.slack[0] < -1e-12 * t || fe.slack[1] < -1e-12 * t * t || fe.slack[2] < -1e-12 * t * t) {
      ++rep.limit_infeasible;
    }
    rep.integral_limit += phi / kGrid;
    rep.integral_dominant += std::min(d.rho11, d.r21) / kGrid;
  }

  double log_sum = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const auto& L = rep.levels[i];
    if (i > 0 && L.sup_error > rep.levels[i - 1].sup_error) rep.monotone = false;
    if (L.sup_error > 0.0) {
      log_sum += std::log(L.sup_error * L.level);
      ++nonzero;
    }
  }
  if (nonzero == rep.levels.size() && nonzero > 0) {
    rep.fitted_constant = std::exp(log_sum / static_cast<double>(nonzero));
    for (const auto& L : rep.levels) {
      const double c = L.sup_error * L.level;
      if (c < rep.fitted_constant / 3.0 || c > 3.0 * rep.fitted_constant) {
        rep.rate_within_factor3 = false;
      }
    }
  } else if (nonzero != 0) {
    // Mixed zero and nonzero errors: no single O(1/n) constant fits.
    rep.rate_within_factor3 = false;
  }
  return rep;
}

}  // namespace ovf
