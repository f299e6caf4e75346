#include "mem0/ddpm.hpp"

#include <cmath>

#include "mem0/rng.hpp"
#include "mem0/util.hpp"

namespace mem0 {

DiffusionSchedule DiffusionSchedule::make(int T, double beta_lo, double beta_hi) {
  if (T < 1) throw ContractError("DiffusionSchedule: T must be >= 1");
  DiffusionSchedule s;
  s.T = T;
  double ab = 1.0;
  for (int t = 0; t < T; ++t) {
    double b = T == 1 ? beta_lo : beta_lo + (beta_hi - beta_lo) * double(t) / double(T - 1);
    s.beta.push_back(b);
    s.alpha.push_back(1.0 - b);
    ab *= 1.0 - b;
    s.alpha_bar.push_back(ab);
  }
  return s;
}

Tensor ddpm_forward_noise(const DiffusionSchedule& sched, const Tensor& clean_flat,
                          const Tensor& eps, int t) {
  if (t < 0 || t >= sched.T) throw ContractError("ddpm_forward_noise: bad step");
  if (clean_flat.data.size() != eps.data.size())
    throw ContractError("ddpm_forward_noise: shape mismatch");
  double sa = std::sqrt(sched.alpha_bar[std::size_t(t)]);
  double sn = std::sqrt(1.0 - sched.alpha_bar[std::size_t(t)]);
  Tensor out = clean_flat;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = float(sa * clean_flat.data[i] + sn * eps.data[i]);
  return out;
}

Tensor ddpm_reverse_mean(const DiffusionSchedule& sched, const Tensor& x, const Tensor& eps,
                         int t) {
  if (t < 0 || t >= sched.T) throw ContractError("ddpm_reverse_mean: bad step");
  double inv_sa = 1.0 / std::sqrt(sched.alpha[std::size_t(t)]);
  double coef = sched.beta[std::size_t(t)] / std::sqrt(1.0 - sched.alpha_bar[std::size_t(t)]);
  Tensor out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = float(inv_sa * (double(x.data[i]) - coef * double(eps.data[i])));
  return out;
}

double ddpm_loss_fn(const DiffusionSchedule& sched, const DenoiserFn& fn,
                    const Tensor& clean_flat, const Tensor& cond, std::uint64_t seed) {
  SplitMix64 rng(seed);
  int t = int(rng.below(std::uint64_t(sched.T)));
  Tensor eps(clean_flat.shape);
  for (float& v : eps.data) v = float(rng.gaussian());
  Tensor noisy = ddpm_forward_noise(sched, clean_flat, eps, t);
  Tensor pred = fn(noisy, t, cond);
  if (pred.data.size() != eps.data.size()) throw ContractError("ddpm_loss_fn: denoiser shape");
  double acc = 0.0;
  for (std::size_t i = 0; i < eps.data.size(); ++i) {
    double d = double(pred.data[i]) - double(eps.data[i]);
    acc += d * d;
  }
  return acc / double(eps.data.size());
}

Tensor ddpm_sample_fn(const DiffusionSchedule& sched, const DenoiserFn& fn, int dim,
                      const Tensor& cond, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tensor x({dim});
  for (float& v : x.data) v = float(rng.gaussian());
  for (int t = sched.T - 1; t >= 0; --t) {
    Tensor eps = fn(x, t, cond);
    Tensor mean = ddpm_reverse_mean(sched, x, eps, t);
    if (t > 0) {
      double ab_prev = sched.alpha_bar[std::size_t(t - 1)];
      double var = sched.beta[std::size_t(t)] * (1.0 - ab_prev) /
                   (1.0 - sched.alpha_bar[std::size_t(t)]);
      double sigma = std::sqrt(var);
      for (std::size_t i = 0; i < mean.data.size(); ++i)
        mean.data[i] = float(double(mean.data[i]) + sigma * rng.gaussian());
    }
    x = mean;
  }
  return x;
}

void denoiser_init(ParamStore& p, const std::string& prefix, const DenoiserConfig& cfg,
                   SplitMix64& rng) {
  p.add_init(prefix + ".time_emb", {cfg.T, cfg.time_dim}, rng);
  int in = cfg.H * cfg.d_a + cfg.time_dim + cfg.cond_dim;
  mlp_init(p, prefix + ".mlp", {in, cfg.hidden, cfg.hidden, cfg.H * cfg.d_a}, rng);
}

Tape::Var denoiser_forward(Tape& tape, ParamStore& p, const std::string& prefix,
                           const DenoiserConfig& cfg, Tape::Var noisy_flat, int t,
                           Tape::Var cond) {
  if (tape.shape(noisy_flat) != std::vector<int>{cfg.H * cfg.d_a})
    throw ContractError("denoiser_forward: noisy chunk shape mismatch");
  Tape::Var emb = tape.row(tape.param(p, prefix + ".time_emb"), t);
  Tape::Var in = tape.concat({noisy_flat, emb, cond});
  return mlp_apply(tape, p, prefix + ".mlp", 3, in);
}

double ddpm_loss(ParamStore& p, const std::string& prefix, const DenoiserConfig& cfg,
                 const DiffusionSchedule& sched, const Tensor& clean_flat,
                 const Tensor& cond, std::uint64_t seed) {
  if (int(clean_flat.data.size()) != cfg.H * cfg.d_a)
    throw ContractError("ddpm_loss: chunk size mismatch");
  SplitMix64 rng(seed);
  int t = int(rng.below(std::uint64_t(sched.T)));
  Tensor eps(clean_flat.shape);
  for (float& v : eps.data) v = float(rng.gaussian());
  Tensor noisy = ddpm_forward_noise(sched, clean_flat, eps, t);
  Tape tape;
  Tape::Var x = tape.leaf(noisy);
  Tape::Var c = tape.leaf(cond);
  Tape::Var pred = denoiser_forward(tape, p, prefix, cfg, x, t, c);
  std::vector<float> target(eps.data.begin(), eps.data.end());
  Tape::Var loss = tape.mse(pred, target);
  tape.backward(loss);
  return tape.value(loss)[0];
}

Tensor ddpm_sample(ParamStore& p, const std::string& prefix, const DenoiserConfig& cfg,
                   const DiffusionSchedule& sched, const Tensor& cond, std::uint64_t seed) {
  DenoiserFn fn = [&](const Tensor& noisy, int t, const Tensor& c) {
    Tape tape;
    Tape::Var x = tape.leaf(noisy);
    Tape::Var cv = tape.leaf(c);
    return tape.tensor(denoiser_forward(tape, p, prefix, cfg, x, t, cv));
  };
  Tensor flat = ddpm_sample_fn(sched, fn, cfg.H * cfg.d_a, cond, seed);
  Tensor out({cfg.H, cfg.d_a});
  out.data = flat.data;
  return out;
}

}  // namespace mem0
