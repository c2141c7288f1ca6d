#include "sme/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EtaView {
  double log_lambda, log_k, beta1, beta2, beta3;
  explicit EtaView(const Vector5& eta)
      : log_lambda(eta[0]), log_k(eta[1]), beta1(eta[2]), beta2(eta[3]),
        beta3(eta[4]) {}
};

ModelParams params_from_eta(const Vector5& eta) {
  return ModelParams{std::exp(eta[0]), std::exp(eta[1]), eta[2], eta[3], eta[4]};
}

// loglik and gradient in one pass; returns -inf for overflowing eta so the
// line search backs off.
double eval(std::span<const SubjectRecord> data, const Vector5& eta,
            Vector5* grad) {
  EtaView v(eta);
  double k = std::exp(v.log_k);
  double ll = 0.0;
  if (grad) grad->setZero();
  for (const auto& r : data) {
    double x1 = r.trt, x2 = r.marker, x3 = static_cast<double>(r.trt) * r.marker;
    double lin = v.beta1 * x1 + v.beta2 * x2 + v.beta3 * x3;
    double w = std::log(r.time) - v.log_lambda;
    double thz = std::exp(lin + k * w);    // theta * (t/lambda)^k
    if (!std::isfinite(thz)) return -kInf;
    double d = r.event;
    ll += d * (lin + v.log_k + (k - 1.0) * std::log(r.time) - k * v.log_lambda) - thz;
    if (grad) {
      (*grad)[0] += k * (thz - d);
      (*grad)[1] += d * (1.0 + k * w) - thz * k * w;
      (*grad)[2] += x1 * (d - thz);
      (*grad)[3] += x2 * (d - thz);
      (*grad)[4] += x3 * (d - thz);
    }
  }
  return ll;
}

void validate_all(std::span<const SubjectRecord> data) {
  for (const auto& r : data) r.validate();
}

}  // namespace

double log_likelihood(std::span<const SubjectRecord> data,
                      const ModelParams& params) {
  params.validate();
  validate_all(data);
  Vector5 eta;
  eta << std::log(params.lambda), std::log(params.k), params.beta1,
      params.beta2, params.beta3;
  return eval(data, eta, nullptr);
}

Vector5 log_likelihood_gradient(std::span<const SubjectRecord> data,
                                const ModelParams& params) {
  params.validate();
  validate_all(data);
  Vector5 eta;
  eta << std::log(params.lambda), std::log(params.k), params.beta1,
      params.beta2, params.beta3;
  Vector5 g;
  eval(data, eta, &g);
  return g;
}

Matrix5 observed_information(std::span<const SubjectRecord> data,
                             const ModelParams& params) {
  params.validate();
  validate_all(data);
  Vector5 eta;
  eta << std::log(params.lambda), std::log(params.k), params.beta1,
      params.beta2, params.beta3;
  Matrix5 hess;
  for (int j = 0; j < 5; ++j) {
    double h = 1e-5 * std::max(1.0, std::abs(eta[j]));
    Vector5 ep = eta, em = eta;
    ep[j] += h;
    em[j] -= h;
    Vector5 gp, gm;
    eval(data, ep, &gp);
    eval(data, em, &gm);
    hess.col(j) = (gp - gm) / (2.0 * h);
  }
  Matrix5 info = -0.5 * (hess + hess.transpose());
  return info;
}

FitResult fit_mle(std::span<const SubjectRecord> data,
                  std::optional<ModelParams> init, double tol, int max_iter) {
  validate_all(data);
  if (data.empty()) throw domain_error("fit_mle: no records");

  // Identifiability: at least one event per (trt, marker) cell.
  int events[2][2] = {{0, 0}, {0, 0}};
  for (const auto& r : data) events[r.trt][r.marker] += r.event;
  for (int trt = 0; trt < 2; ++trt)
    for (int m = 0; m < 2; ++m)
      if (events[trt][m] == 0)
        throw non_identifiable_error(
            "fit_mle: no events in cell (trt=" + std::to_string(trt) +
                ", marker=" + std::to_string(m) + ")",
            trt, m);

  Vector5 eta;
  if (init) {
    init->validate();
    eta << std::log(init->lambda), std::log(init->k), init->beta1, init->beta2,
        init->beta3;
  } else {
    // Exponential start: k=1, lambda = median time / log 2, betas 0.
    std::vector<double> times;
    times.reserve(data.size());
    for (const auto& r : data) times.push_back(r.time);
    auto mid = times.begin() + times.size() / 2;
    std::nth_element(times.begin(), mid, times.end());
    double med = *mid;
    eta << std::log(med / std::log(2.0)), 0.0, 0.0, 0.0, 0.0;
  }

  Vector5 grad;
  double f = eval(data, eta, &grad);
  if (!std::isfinite(f))
    throw domain_error("fit_mle: likelihood not finite at the starting point");

  Matrix5 binv = Matrix5::Identity();  // inverse-Hessian approximation (of -ll)
  int iter = 0;
  double gnorm = grad.lpNorm<Eigen::Infinity>();
  while (gnorm >= tol && iter < max_iter) {
    ++iter;
    Vector5 dir = binv * grad;  // ascent direction
    if (dir.dot(grad) <= 0.0) {
      binv = Matrix5::Identity();
      dir = grad;
    }
    // Backtracking Armijo line search.
    double step = 1.0;
    double slope = dir.dot(grad);
    Vector5 eta_new = eta;
    Vector5 grad_new = grad;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      eta_new = eta + step * dir;
      f_new = eval(data, eta_new, &grad_new);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Vector5 s = eta_new - eta;
    Vector5 y = grad - grad_new;  // change in gradient of -ll
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      Vector5 by = binv * y;
      double yby = y.dot(by);
      binv += ((sy + yby) / (sy * sy)) * (s * s.transpose()) -
              (by * s.transpose() + s * by.transpose()) / sy;
    }
    eta = eta_new;
    grad = grad_new;
    f = f_new;
    gnorm = grad.lpNorm<Eigen::Infinity>();
  }

  FitResult out;
  out.params = params_from_eta(eta);
  out.loglik = f;
  out.iterations = iter;
  out.gradient_norm = gnorm;
  out.converged = gnorm < tol;
  if (out.converged) {
    Matrix5 info = observed_information(data, out.params);
    Eigen::SelfAdjointEigenSolver<Matrix5> eig(info);
    double max_ev = eig.eigenvalues().maxCoeff();
    if (!(max_ev > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * max_ev)
      throw singular_information_error(
          "fit_mle: observed information is singular or not positive definite");
    out.cov = info.llt().solve(Matrix5::Identity());
    out.cov = 0.5 * (out.cov + out.cov.transpose());
  }
  return out;
}

}  // namespace sme
