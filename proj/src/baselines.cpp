#include "qpat/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qpat/error.hpp"

namespace qpat {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_features(std::span<const Pattern> patterns) {
  Matrix m(patterns.size(), kFeatureCount);
  for (std::size_t i = 0; i < patterns.size(); ++i)
    std::copy(patterns[i].features.begin(), patterns[i].features.end(), m.row(i).begin());
  return m;
}

Matrix Matrix::from_features(std::span<const ScoredPattern> patterns) {
  Matrix m(patterns.size(), kFeatureCount);
  for (std::size_t i = 0; i < patterns.size(); ++i)
    std::copy(patterns[i].pattern.features.begin(), patterns[i].pattern.features.end(), m.row(i).begin());
  return m;
}

std::vector<std::size_t> ClusterAssignment::counts(int clusters) const {
  std::vector<std::size_t> c(static_cast<std::size_t>(clusters), 0);
  for (int l : labels) ++c[static_cast<std::size_t>(l)];
  return c;
}

namespace {

// Portable uniform [0, 1) from the raw engine output.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Matrix kmeans_plus_plus(const Matrix& x, int k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  Matrix centers(static_cast<std::size_t>(k), x.cols());
  auto first = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
  std::copy(x.row(first).begin(), x.row(first).end(), centers.row(0).begin());

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), centers.row(0));

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
    }
    auto dst = centers.row(static_cast<std::size_t>(c));
    std::copy(x.row(pick).begin(), x.row(pick).end(), dst.begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), dst));
  }
  return centers;
}

std::vector<int> assign(const Matrix& x, const Matrix& centers) {
  std::vector<int> labels(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const double d = squared_distance(x.row(i), centers.row(c));
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[i] = arg;
  }
  return labels;
}

double objective(const Matrix& x, const Matrix& centers, const std::vector<int>& labels) {
  double j = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    j += squared_distance(x.row(i), centers.row(static_cast<std::size_t>(labels[i])));
  return j;
}

void update_centers(const Matrix& x, const std::vector<int>& labels, Matrix& centers) {
  const std::size_t k = centers.rows();
  std::vector<std::size_t> count(k, 0);
  Matrix sum(k, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++count[c];
    auto dst = sum.row(c);
    auto src = x.row(i);
    for (std::size_t d = 0; d < x.cols(); ++d) dst[d] += src[d];
  }

  std::vector<bool> taken(x.rows(), false);
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] > 0) {
      for (std::size_t d = 0; d < x.cols(); ++d) centers(c, d) = sum(c, d) / static_cast<double>(count[c]);
      continue;
    }
    // empty cluster: reseed at the point farthest from its own center
    double far = 0.0;
    std::size_t arg = x.rows();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (taken[i]) continue;
      const auto own = static_cast<std::size_t>(labels[i]);
      const double mean_dist = [&] {
        double s = 0.0;
        for (std::size_t d = 0; d < x.cols(); ++d) {
          const double m = count[own] > 0 ? sum(own, d) / static_cast<double>(count[own]) : centers(own, d);
          s += (x(i, d) - m) * (x(i, d) - m);
        }
        return s;
      }();
      if (mean_dist > far) {
        far = mean_dist;
        arg = i;
      }
    }
    if (arg == x.rows()) continue;  // every point sits on its center
    taken[arg] = true;
    std::copy(x.row(arg).begin(), x.row(arg).end(), centers.row(c).begin());
  }
}

}  // namespace

ClusterAssignment kmeans(const Matrix& x, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k-means needs k >= 1");
  if (x.rows() < static_cast<std::size_t>(k)) {
    std::ostringstream msg;
    msg << "k-means with k = " << k << " on " << x.rows() << " points";
    throw Error(ErrorCode::TooFewPoints, msg.str());
  }

  std::mt19937_64 rng(seed);
  ClusterAssignment out;
  out.centers = kmeans_plus_plus(x, k, rng);
  out.labels = assign(x, out.centers);

  for (int it = 1; it <= options.max_iterations; ++it) {
    update_centers(x, out.labels, out.centers);
    out.trace.push_back(objective(x, out.centers, out.labels));
    out.iterations = it;
    auto next = assign(x, out.centers);
    if (next == out.labels) {
      out.converged = true;
      break;
    }
    out.labels = std::move(next);
  }
  return out;
}

namespace {

// Lower-triangular Cholesky factor; false when not positive definite.
bool cholesky(const Matrix& a, Matrix& l) {
  const std::size_t n = a.rows();
  l = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) return false;
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return true;
}

struct Component {
  double log_weight = 0.0;
  std::vector<double> mean;
  Matrix chol;
  double log_det = 0.0;
};

double log_density(std::span<const double> x, const Component& c, std::vector<double>& work) {
  const std::size_t d = x.size();
  // forward substitution: L z = x - mu
  double quad = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double v = x[i] - c.mean[i];
    for (std::size_t k = 0; k < i; ++k) v -= c.chol(i, k) * work[k];
    work[i] = v / c.chol(i, i);
    quad += work[i] * work[i];
  }
  return -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + c.log_det + quad);
}

[[noreturn]] void singular(std::size_t component, std::string_view why) {
  std::ostringstream msg;
  msg << "component " << component << ": " << why;
  throw Error(ErrorCode::SingularCovariance, msg.str());
}

// M-step from a responsibility matrix (n x K).
std::vector<Component> maximize(const Matrix& x, const Matrix& resp, double ridge,
                                std::vector<double>& weights, std::vector<Matrix>& covs) {
  const std::size_t n = x.rows(), dims = x.cols(), k = resp.cols();
  std::vector<Component> comps(k);
  weights.assign(k, 0.0);
  covs.assign(k, Matrix(dims, dims));
  for (std::size_t c = 0; c < k; ++c) {
    double nk = 0.0;
    for (std::size_t i = 0; i < n; ++i) nk += resp(i, c);
    if (!(nk > 0.0)) singular(c, "no points assigned");

    auto& comp = comps[c];
    comp.mean.assign(dims, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < dims; ++d) comp.mean[d] += resp(i, c) * x(i, d);
    for (auto& m : comp.mean) m /= nk;

    auto& cov = covs[c];
    std::vector<double> diff(dims);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = resp(i, c);
      if (r == 0.0) continue;
      for (std::size_t d = 0; d < dims; ++d) diff[d] = x(i, d) - comp.mean[d];
      for (std::size_t a = 0; a < dims; ++a)
        for (std::size_t b = 0; b <= a; ++b) cov(a, b) += r * diff[a] * diff[b];
    }
    for (std::size_t a = 0; a < dims; ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        cov(a, b) /= nk;
        cov(b, a) = cov(a, b);
      }
      cov(a, a) += ridge;
    }
    if (!cholesky(cov, comp.chol)) singular(c, "regularized covariance is not positive definite");
    comp.log_det = 0.0;
    for (std::size_t d = 0; d < dims; ++d) comp.log_det += 2.0 * std::log(comp.chol(d, d));
    weights[c] = nk / static_cast<double>(n);
    comp.log_weight = std::log(weights[c]);
  }
  return comps;
}

// E-step: fills responsibilities and returns the log-likelihood.
double expect(const Matrix& x, const std::vector<Component>& comps, Matrix& resp) {
  const std::size_t n = x.rows(), k = comps.size();
  std::vector<double> work(x.cols()), logp(k);
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      logp[c] = comps[c].log_weight + log_density(x.row(i), comps[c], work);
      top = std::max(top, logp[c]);
    }
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += std::exp(logp[c] - top);
    const double lse = top + std::log(s);
    ll += lse;
    for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(logp[c] - lse);
  }
  return ll;
}

}  // namespace

GmmResult gmm_em(const Matrix& x, int components, std::uint64_t seed, const GmmOptions& options) {
  if (components < 1) throw Error(ErrorCode::InvalidConfig, "GMM needs at least one component");
  if (x.rows() < 2 * static_cast<std::size_t>(components)) {
    std::ostringstream msg;
    msg << "GMM with " << components << " components on " << x.rows() << " points";
    throw Error(ErrorCode::TooFewPoints, msg.str());
  }
  const auto k = static_cast<std::size_t>(components);
  const auto init = kmeans(x, components, seed);

  Matrix resp(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) resp(i, static_cast<std::size_t>(init.labels[i])) = 1.0;

  GmmResult out;
  auto comps = maximize(x, resp, options.ridge, out.weights, out.covariances);
  auto& a = out.assignment;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const double ll = expect(x, comps, resp);
    a.trace.push_back(ll);
    a.iterations = it;
    if (it > 1 && ll - a.trace[a.trace.size() - 2] < options.tolerance) {
      a.converged = true;
      break;
    }
    if (it == options.max_iterations) break;
    comps = maximize(x, resp, options.ridge, out.weights, out.covariances);
  }

  a.labels.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (resp(i, c) > resp(i, arg)) arg = c;
    a.labels[i] = static_cast<int>(arg);
  }
  a.centers = Matrix(k, x.cols());
  for (std::size_t c = 0; c < k; ++c)
    std::copy(comps[c].mean.begin(), comps[c].mean.end(), a.centers.row(c).begin());
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& input) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw Error(ErrorCode::DimensionMismatch, "eigendecomposition needs a square matrix");
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  double scale = 0.0;
  for (double e : a.data()) scale += e * e;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * scale || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

Projection2D pca_project(const Matrix& x) {
  const std::size_t n = x.rows(), dims = x.cols();
  if (n < 3) throw Error(ErrorCode::TooFewPoints, "PCA needs at least 3 rows");
  if (dims < 2) throw Error(ErrorCode::DimensionMismatch, "PCA needs at least 2 columns");

  Projection2D out;
  out.mean.assign(dims, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims; ++d) out.mean[d] += x(i, d);
  for (auto& m : out.mean) m /= static_cast<double>(n);

  Matrix cov(dims, dims);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < dims; ++a) {
      const double da = x(i, a) - out.mean[a];
      for (std::size_t b = 0; b <= a; ++b) cov(a, b) += da * (x(i, b) - out.mean[b]);
    }
  for (std::size_t a = 0; a < dims; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      cov(a, b) /= static_cast<double>(n - 1);
      cov(b, a) = cov(a, b);
    }

  const auto eig = symmetric_eigen(cov);
  for (std::size_t c = 0; c < 2; ++c) {
    auto& comp = out.components[c];
    comp.resize(dims);
    std::size_t arg = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      comp[d] = eig.vectors(d, c);
      if (std::abs(comp[d]) > std::abs(comp[arg])) arg = d;
    }
    if (comp[arg] < 0.0)
      for (auto& e : comp) e = -e;
  }
  out.coordinates = project(out, x);

  // Singular values from the projected data rather than the covariance
  // eigenvalues, which carry only half the precision near rank deficiency.
  std::array<double, 2> ss{0.0, 0.0};
  for (const auto& xy : out.coordinates) ss[0] += xy[0] * xy[0], ss[1] += xy[1] * xy[1];
  double total = 0.0;
  for (std::size_t d = 0; d < dims; ++d) total += cov(d, d);
  total *= static_cast<double>(n - 1);
  if (total > 0.0) out.explained_variance = {ss[0] / total, ss[1] / total};
  out.degenerate_rank = ss[0] == 0.0 || std::sqrt(ss[1]) < 1e-12 * std::sqrt(ss[0]);
  return out;
}

std::vector<std::array<double, 2>> project(const Projection2D& basis, const Matrix& x) {
  if (x.cols() != basis.mean.size()) throw Error(ErrorCode::DimensionMismatch, "projection dimension mismatch");
  std::vector<std::array<double, 2>> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      double s = 0.0;
      for (std::size_t d = 0; d < x.cols(); ++d) s += (x(i, d) - basis.mean[d]) * basis.components[c][d];
      out[i][c] = s;
    }
  return out;
}

double balance_ratio(std::size_t a, std::size_t b) {
  const auto hi = std::max(a, b);
  if (hi == 0) return 0.0;
  return static_cast<double>(std::min(a, b)) / static_cast<double>(hi);
}

BalanceRow make_balance_row(std::string method, std::size_t buys, std::size_t sells) {
  return BalanceRow{std::move(method), buys, sells, balance_ratio(buys, sells)};
}

std::pair<std::size_t, std::size_t> cluster_label_counts(const ClusterAssignment& assignment,
                                                         std::span<const Pattern> patterns) {
  if (assignment.labels.size() != patterns.size())
    throw Error(ErrorCode::DimensionMismatch, "cluster labels do not align with patterns");
  int clusters = 0;
  for (int l : assignment.labels) clusters = std::max(clusters, l + 1);
  std::vector<std::size_t> buy(static_cast<std::size_t>(clusters), 0), sell(buy);
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment.labels[i]);
    (patterns[i].label == Label::Buy ? buy : sell)[c]++;
  }
  std::size_t buys = 0, sells = 0;
  for (std::size_t c = 0; c < buy.size(); ++c) {
    if (buy[c] >= sell[c]) buys += buy[c] + sell[c];
    else sells += buy[c] + sell[c];
  }
  return {buys, sells};
}

std::vector<BalanceRow> balance_report(const FilteredLibrary& entropy_library,
                                       const ClusterAssignment& kmeans_result,
                                       const ClusterAssignment& gmm_result,
                                       std::span<const Pattern> raw) {
  std::vector<BalanceRow> rows;
  std::size_t raw_buys = 0;
  for (const auto& p : raw)
    if (p.label == Label::Buy) ++raw_buys;
  rows.push_back(make_balance_row("raw", raw_buys, raw.size() - raw_buys));
  rows.push_back(make_balance_row("entropy", entropy_library.buys.size(), entropy_library.sells.size()));
  auto [kb, ks] = cluster_label_counts(kmeans_result, raw);
  rows.push_back(make_balance_row("kmeans", kb, ks));
  auto [gb, gs] = cluster_label_counts(gmm_result, raw);
  rows.push_back(make_balance_row("gmm", gb, gs));
  return rows;
}

std::string format_balance_table(std::span<const BalanceRow> rows) {
  std::string out = "method        buy     sell    ratio\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %6zu %8zu %8.3f\n", r.method.c_str(), r.buys, r.sells, r.ratio);
    out += line;
  }
  return out;
}

}  // namespace qpat
