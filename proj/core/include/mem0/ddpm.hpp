#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mem0/nn.hpp"

namespace mem0 {

// Linear beta schedule over T steps; epsilon-prediction everywhere. The
// default range is sized for short schedules (T ~ 16): the terminal
// alpha_bar must be close to zero so that sampling, which starts from a
// standard normal, stays inside the distribution the denoiser was trained
// on. (The familiar 1e-4..2e-2 range assumes ~1000 steps and would leave
// alpha_bar(T) ~ 0.85 at T = 16.)
struct DiffusionSchedule {
  int T = 16;
  std::vector<double> beta, alpha, alpha_bar;

  static DiffusionSchedule make(int T = 16, double beta_lo = 2e-2, double beta_hi = 5e-1);
};

// A denoiser callable: predicts the noise from (noisy flat chunk, diffusion
// step, condition). Test oracles substitute stubs here.
using DenoiserFn =
    std::function<Tensor(const Tensor& noisy_flat, int t, const Tensor& cond)>;

// Closed-form forward process: sqrt(ab_t) x0 + sqrt(1-ab_t) eps.
Tensor ddpm_forward_noise(const DiffusionSchedule& sched, const Tensor& clean_flat,
                          const Tensor& eps, int t);

// One reverse (ancestral) step without the stochastic term; exposed for the
// closed-form inversion check at T=1.
Tensor ddpm_reverse_mean(const DiffusionSchedule& sched, const Tensor& x, const Tensor& eps,
                         int t);

// Monte-Carlo epsilon-MSE of an arbitrary denoiser on one clean chunk
// (samples t and eps from the seed). Used with stub denoisers in tests.
double ddpm_loss_fn(const DiffusionSchedule& sched, const DenoiserFn& fn,
                    const Tensor& clean_flat, const Tensor& cond, std::uint64_t seed);

// Full ancestral sampler against an arbitrary denoiser.
Tensor ddpm_sample_fn(const DiffusionSchedule& sched, const DenoiserFn& fn, int dim,
                      const Tensor& cond, std::uint64_t seed);

// Learned denoiser: MLP over [noisy chunk ; learned time embedding ;
// condition], hidden GELU layers.
struct DenoiserConfig {
  int H = 8;        // chunk length
  int d_a = 0;      // per-step action width
  int cond_dim = 0; // conditioning width
  int time_dim = 32;
  int hidden = 128;
  int T = 16;
};

void denoiser_init(ParamStore& p, const std::string& prefix, const DenoiserConfig& cfg,
                   SplitMix64& rng);
Tape::Var denoiser_forward(Tape& tape, ParamStore& p, const std::string& prefix,
                           const DenoiserConfig& cfg, Tape::Var noisy_flat, int t,
                           Tape::Var cond);

// Builds the tape, runs backward, accumulates parameter gradients, returns
// the scalar loss.
double ddpm_loss(ParamStore& p, const std::string& prefix, const DenoiserConfig& cfg,
                 const DiffusionSchedule& sched, const Tensor& clean_flat,
                 const Tensor& cond, std::uint64_t seed);

// Deterministic given (params, cond, seed); returns shape (H, d_a).
Tensor ddpm_sample(ParamStore& p, const std::string& prefix, const DenoiserConfig& cfg,
                   const DiffusionSchedule& sched, const Tensor& cond, std::uint64_t seed);

}  // namespace mem0
