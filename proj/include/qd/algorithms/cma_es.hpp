#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qd/common.hpp"

namespace qd::algorithms {

class BatchMismatch : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CMA-ES sampler/updater with rank-mu and rank-one covariance updates,
// cumulative step-size adaptation, and two covariance modes: full matrix
// (eigendecomposition per generation, dimensions <= 256) and separable
// diagonal for high-dimensional genomes.
class CmaEs {
 public:
  static constexpr int kMaxFullDim = 256;

  static int default_lambda(int dim) {
    return 4 + static_cast<int>(std::floor(3.0 * std::log(dim)));
  }

  CmaEs(std::vector<double> mean, double sigma, bool diagonal,
        int lambda = 0) {
    reinitialize(std::move(mean), sigma, diagonal, lambda);
  }

  void reinitialize(std::vector<double> mean, double sigma, bool diagonal,
                    int lambda = 0) {
    n_ = static_cast<int>(mean.size());
    if (n_ < 1) throw std::invalid_argument("CmaEs: empty mean");
    if (!diagonal && n_ > kMaxFullDim)
      throw std::invalid_argument(
          "CmaEs: full covariance limited to 256 dimensions");
    mean_ = std::move(mean);
    sigma_ = sigma;
    sigma0_ = sigma;
    diagonal_ = diagonal;
    lambda_ = lambda > 0 ? lambda : default_lambda(n_);
    if (lambda_ < 2) lambda_ = 2;

    mu_ = lambda_ / 2;
    weights_.resize(mu_);
    double wsum = 0.0;
    for (int i = 0; i < mu_; ++i) {
      weights_[i] = std::log(lambda_ / 2.0 + 0.5) - std::log(i + 1.0);
      wsum += weights_[i];
    }
    double w2 = 0.0;
    for (auto& w : weights_) {
      w /= wsum;
      w2 += w * w;
    }
    mu_eff_ = 1.0 / w2;

    const double n = n_;
    c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
    d_sigma_ = 1.0 +
               2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) -
                                       1.0) +
               c_sigma_;
    c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
    c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
    c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                     ((n + 2.0) * (n + 2.0) + mu_eff_));
    if (diagonal_) {
      // separable CMA-ES learning-rate correction
      double boost = (n + 2.0) / 3.0;
      c_1_ = std::min(1.0, c_1_ * boost);
      c_mu_ = std::min(1.0 - c_1_, c_mu_ * boost);
    }
    chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    path_sigma_.assign(n_, 0.0);
    path_c_.assign(n_, 0.0);
    cov_diag_.assign(n_, 1.0);
    if (!diagonal_) {
      cov_ = Eigen::MatrixXd::Identity(n_, n_);
      eigen_basis_ = Eigen::MatrixXd::Identity(n_, n_);
      eigen_sqrt_.assign(n_, 1.0);
    }
    generation_ = 0;
    last_y_.clear();
  }

  int dim() const { return n_; }
  int lambda() const { return lambda_; }
  double sigma() const { return sigma_; }
  bool diagonal() const { return diagonal_; }
  const std::vector<double>& mean() const { return mean_; }
  int generation() const { return generation_; }
  const std::vector<double>& cov_diagonal() const { return cov_diag_; }

  // Draw the generation's lambda candidates: x_i = mean + sigma * y_i.
  std::vector<std::vector<double>> sample(Rng& rng) {
    last_y_.assign(lambda_, std::vector<double>(n_));
    std::vector<std::vector<double>> xs(lambda_,
                                        std::vector<double>(n_));
    for (int i = 0; i < lambda_; ++i) {
      if (diagonal_) {
        for (int j = 0; j < n_; ++j)
          last_y_[i][j] = std::sqrt(cov_diag_[j]) * normal(rng);
      } else {
        Eigen::VectorXd z(n_);
        for (int j = 0; j < n_; ++j) z[j] = normal(rng);
        Eigen::VectorXd y = eigen_basis_ *
                            (Eigen::Map<Eigen::VectorXd>(eigen_sqrt_.data(),
                                                         n_)
                                 .cwiseProduct(z));
        for (int j = 0; j < n_; ++j) last_y_[i][j] = y[j];
      }
      for (int j = 0; j < n_; ++j)
        xs[i][j] = mean_[j] + sigma_ * last_y_[i][j];
    }
    return xs;
  }

  // `order` lists indices into the last sampled batch, best candidate
  // first. Must cover the whole batch.
  void update(const std::vector<int>& order) {
    if (static_cast<int>(order.size()) != lambda_ ||
        static_cast<int>(last_y_.size()) != lambda_)
      throw BatchMismatch("ranking size does not match sampled batch");
    std::vector<std::vector<double>> ranked(lambda_);
    for (int i = 0; i < lambda_; ++i) ranked[i] = last_y_[order[i]];
    update_ys(ranked);
  }

  // Ranked y-vectors of one full batch, best candidate first. The y's must
  // have been produced under the distribution currently held by the
  // strategy (callers tracking several in-flight batches recompute them
  // from their own mean/sigma snapshots).
  void update_ys(const std::vector<std::vector<double>>& ranked) {
    if (static_cast<int>(ranked.size()) != lambda_)
      throw BatchMismatch("ranking size does not match lambda");

    std::vector<double> y_w(n_, 0.0);
    for (int i = 0; i < mu_; ++i) {
      const auto& y = ranked[i];
      for (int j = 0; j < n_; ++j) y_w[j] += weights_[i] * y[j];
    }
    for (int j = 0; j < n_; ++j) mean_[j] += sigma_ * y_w[j];

    // step-size path uses C^{-1/2} y_w
    std::vector<double> c_inv_y(n_);
    if (diagonal_) {
      for (int j = 0; j < n_; ++j)
        c_inv_y[j] = y_w[j] / std::sqrt(cov_diag_[j]);
    } else {
      Eigen::Map<Eigen::VectorXd> yw(y_w.data(), n_);
      Eigen::VectorXd t = eigen_basis_.transpose() * yw;
      for (int j = 0; j < n_; ++j) t[j] /= eigen_sqrt_[j];
      Eigen::VectorXd r = eigen_basis_ * t;
      for (int j = 0; j < n_; ++j) c_inv_y[j] = r[j];
    }
    double ps_norm2 = 0.0;
    double coef = std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_);
    for (int j = 0; j < n_; ++j) {
      path_sigma_[j] = (1.0 - c_sigma_) * path_sigma_[j] + coef * c_inv_y[j];
      ps_norm2 += path_sigma_[j] * path_sigma_[j];
    }
    double ps_norm = std::sqrt(ps_norm2);

    generation_ += 1;
    double denom =
        std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
    bool h_sigma =
        ps_norm / denom < (1.4 + 2.0 / (n_ + 1.0)) * chi_n_;

    double cc_coef = std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_);
    for (int j = 0; j < n_; ++j)
      path_c_[j] =
          (1.0 - c_c_) * path_c_[j] + (h_sigma ? cc_coef * y_w[j] : 0.0);

    double c1a = c_1_ * (1.0 - (h_sigma ? 0.0 : 1.0) * c_c_ * (2.0 - c_c_));
    if (diagonal_) {
      for (int j = 0; j < n_; ++j) {
        double rank_mu = 0.0;
        for (int i = 0; i < mu_; ++i) {
          double y = ranked[i][j];
          rank_mu += weights_[i] * y * y;
        }
        cov_diag_[j] = (1.0 - c1a - c_mu_) * cov_diag_[j] +
                       c_1_ * path_c_[j] * path_c_[j] + c_mu_ * rank_mu;
        cov_diag_[j] = std::max(cov_diag_[j], 1e-20);
      }
    } else {
      Eigen::Map<Eigen::VectorXd> pc(path_c_.data(), n_);
      cov_ = (1.0 - c1a - c_mu_) * cov_ + c_1_ * (pc * pc.transpose());
      for (int i = 0; i < mu_; ++i) {
        Eigen::Map<const Eigen::VectorXd> y(ranked[i].data(), n_);
        cov_ += c_mu_ * weights_[i] * (y * y.transpose());
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
      eigen_basis_ = es.eigenvectors();
      for (int j = 0; j < n_; ++j) {
        eigen_sqrt_[j] = std::sqrt(std::max(es.eigenvalues()[j], 1e-20));
        cov_diag_[j] = cov_(j, j);
      }
    }

    sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
  }

  double initial_sigma() const { return sigma0_; }

  // Rebuild the internal y-vectors of an in-flight batch after a restore
  // (mean and sigma are unchanged between sample and update).
  void restore_batch(const std::vector<std::vector<double>>& xs) {
    if (static_cast<int>(xs.size()) != lambda_)
      throw BatchMismatch("restored batch size does not match lambda");
    last_y_.assign(lambda_, std::vector<double>(n_));
    for (int i = 0; i < lambda_; ++i)
      for (int j = 0; j < n_; ++j)
        last_y_[i][j] = (xs[i][j] - mean_[j]) / sigma_;
  }

  // Serialization hooks for checkpointing (text, round-trip precision).
  template <typename Writer>
  void save(Writer&& put) const {
    put("sigma", sigma_);
    put("generation", static_cast<double>(generation_));
    for (int j = 0; j < n_; ++j) put("mean", mean_[j]);
    for (int j = 0; j < n_; ++j) put("path_sigma", path_sigma_[j]);
    for (int j = 0; j < n_; ++j) put("path_c", path_c_[j]);
    for (int j = 0; j < n_; ++j) put("cov_diag", cov_diag_[j]);
    if (!diagonal_)
      for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) put("cov", cov_(r, c));
  }

  template <typename Reader>
  void load(Reader&& get) {
    sigma_ = get();
    generation_ = static_cast<int>(get());
    for (int j = 0; j < n_; ++j) mean_[j] = get();
    for (int j = 0; j < n_; ++j) path_sigma_[j] = get();
    for (int j = 0; j < n_; ++j) path_c_[j] = get();
    for (int j = 0; j < n_; ++j) cov_diag_[j] = get();
    if (!diagonal_) {
      for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) cov_(r, c) = get();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
      eigen_basis_ = es.eigenvectors();
      for (int j = 0; j < n_; ++j)
        eigen_sqrt_[j] = std::sqrt(std::max(es.eigenvalues()[j], 1e-20));
    }
    last_y_.clear();
  }

 private:
  int n_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  bool diagonal_ = true;
  double sigma_ = 0.3;
  double sigma0_ = 0.3;
  double mu_eff_ = 0.0;
  double c_sigma_ = 0.0, d_sigma_ = 0.0, c_c_ = 0.0, c_1_ = 0.0, c_mu_ = 0.0;
  double chi_n_ = 0.0;
  int generation_ = 0;

  std::vector<double> mean_;
  std::vector<double> weights_;
  std::vector<double> path_sigma_;
  std::vector<double> path_c_;
  std::vector<double> cov_diag_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd eigen_basis_;
  std::vector<double> eigen_sqrt_;
  std::vector<std::vector<double>> last_y_;
};

}  // namespace qd::algorithms
