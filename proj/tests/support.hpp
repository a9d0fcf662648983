// SPDX-License-Identifier: Apache-2.0
// Shared test helpers and independent oracles.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>

#include "gesture/autodiff.hpp"
#include "gesture/pose.hpp"

namespace gesture::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("gesture_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// |a - b| / max(|a|, |b|, floor).
inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct GradReport {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
};

/// Central differences of `loss` against every entry of every parameter,
/// compared with the analytic gradients already stored in `store`.
inline GradReport check_gradients(ad::ParamStore& store, const std::function<double()>& loss, double step = 1e-5,
                                  double floor = 1e-6) {
  GradReport report;
  for (ad::ParamId id : store.ids()) {
    const Eigen::MatrixXd analytic = store.grad(id);
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      double& v = store.value(id).data()[i];
      const double saved = v;
      v = saved + step;
      const double up = loss();
      v = saved - step;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double e = rel_err(analytic.data()[i], numeric, floor);
      ++report.checked;
      if (e > report.worst) {
        report.worst = e;
        report.where = store.name(id) + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic.data()[i]) +
                       " numeric " + std::to_string(numeric);
      }
    }
  }
  return report;
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// eigenvalues (descending) and eigenvectors as matching columns.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigen(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {values, vectors};
}

/// BLEU by explicit n-gram enumeration: every candidate n-gram is compared
/// position by position against every reference n-gram.
inline double brute_bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref, int max_n = 4) {
  if (cand.empty()) return 0.0;
  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(max_n), cand.size());
  auto same = [](const std::vector<std::string>& x, std::size_t i, const std::vector<std::string>& y, std::size_t j,
                 std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (x[i + k] != y[j + k]) return false;
    }
    return true;
  };
  double product = 1.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    const std::size_t total = cand.size() - n + 1;
    std::size_t matched = 0;
    std::vector<bool> seen(total, false);
    for (std::size_t i = 0; i < total; ++i) {
      if (seen[i]) continue;
      std::size_t in_cand = 0;
      for (std::size_t j = i; j < total; ++j) {
        if (same(cand, i, cand, j, n)) {
          seen[j] = true;
          ++in_cand;
        }
      }
      std::size_t in_ref = 0;
      for (std::size_t j = 0; j + n <= ref.size(); ++j) {
        if (same(cand, i, ref, j, n)) ++in_ref;
      }
      matched += std::min(in_cand, in_ref);
    }
    double p = 0.0;
    if (n == 1) {
      p = static_cast<double>(matched) / static_cast<double>(total);
    } else {
      p = (static_cast<double>(matched) + 1.0) / (static_cast<double>(total) + 1.0);
    }
    product *= p;
  }
  if (product == 0.0) return 0.0;
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::pow(product, 1.0 / static_cast<double>(orders));
}

/// A plausible pixel-space pose with all joints present.
inline RawPose random_raw_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RawPose p;
  const double cx = 300.0 + 50.0 * u(rng);
  const double cy = 150.0 + 30.0 * u(rng);
  const double s = 40.0 + 10.0 * u(rng);
  const std::array<Point2, kNumJoints> base = {{{0, -1.2}, {0, 0}, {1, 0}, {1.3, 1}, {1.2, 2}, {-1, 0}, {-1.3, 1}, {-1.2, 2}}};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    p.joints[j] = {cx + s * (base[j].x + 0.3 * u(rng)), cy + s * (base[j].y + 0.3 * u(rng))};
    p.present[j] = true;
  }
  return p;
}

}  // namespace gesture::testing
