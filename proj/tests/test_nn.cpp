#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <mem0/ddpm.hpp>
#include <mem0/nn.hpp>
#include <mem0/rng.hpp>
#include <mem0/util.hpp>

using namespace mem0;

namespace {

using BuildFn = std::function<Tape::Var(Tape&, ParamStore&)>;

// Central finite differences against the tape's analytic gradients. The
// perturbed parameter is re-read from float storage, so the effective step is
// the exact representable difference and introduces no rounding error.
double max_grad_err(ParamStore& store, const BuildFn& build) {
  store.zero_grads();
  Tape tape;
  Tape::Var loss = build(tape, store);
  REQUIRE(tape.shape(loss) == std::vector<int>{1});
  tape.backward(loss);
  std::map<std::string, std::vector<float>> analytic;
  for (auto& [name, e] : store.entries) analytic[name] = e.grad.data;

  const float h = 1.0f / 2048.0f;
  double worst = 0.0;
  for (auto& [name, e] : store.entries) {
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      float orig = e.value.data[i];
      float fp = orig + h, fm = orig - h;
      e.value.data[i] = fp;
      Tape tp;
      double lp = tp.value(build(tp, store))[0];
      e.value.data[i] = fm;
      Tape tm;
      double lm = tm.value(build(tm, store))[0];
      e.value.data[i] = orig;
      double num = (lp - lm) / (double(fp) - double(fm));
      double ana = analytic[name][i];
      double denom = std::max({std::abs(num), std::abs(ana), 1e-4});
      worst = std::max(worst, std::abs(num - ana) / denom);
    }
  }
  store.zero_grads();
  return worst;
}

ParamStore random_store(const std::vector<std::pair<std::string, std::vector<int>>>& spec,
                        std::uint64_t seed) {
  ParamStore s;
  SplitMix64 g(seed);
  for (const auto& [name, shape] : spec) {
    Tensor& t = s.add(name, shape);
    for (float& x : t.data) x = float(g.gaussian() * 0.7);
  }
  return s;
}

std::vector<float> random_vec(int n, std::uint64_t seed) {
  SplitMix64 g(seed);
  std::vector<float> v(std::size_t(n), 0.0f);
  for (float& x : v) x = float(g.gaussian());
  return v;
}

// Scalarizes an arbitrary tape value so every op check ends in one number.
Tape::Var to_scalar(Tape& t, Tape::Var v, int n, std::uint64_t seed) {
  return t.mse(v, random_vec(n, seed));
}

constexpr int kSeeds = 20;
constexpr double kTol = 1e-4;

}  // namespace

TEST_CASE("gradients: linear with and without bias") {
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    ParamStore p = random_store({{"W", {3, 4}}, {"b", {3}}, {"x", {4}}}, 100 + s);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var y = t.linear(t.param(ps, "W"), t.param(ps, "b"), t.param(ps, "x"));
            return to_scalar(t, y, 3, s);
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var y = t.linear(t.param(ps, "W"), -1, t.param(ps, "x"));
            return to_scalar(t, y, 3, s ^ 1);
          }) < kTol);
  }
}

TEST_CASE("gradients: matmul and matvec") {
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    ParamStore p = random_store({{"A", {3, 4}}, {"B", {4, 2}}, {"x", {4}}}, 200 + s);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var c = t.matmul(t.param(ps, "A"), t.param(ps, "B"));
            return to_scalar(t, t.mean_rows(c), 2, s);
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var y = t.matvec(t.param(ps, "A"), t.param(ps, "x"));
            return to_scalar(t, y, 3, s);
          }) < kTol);
  }
}

TEST_CASE("gradients: gelu, add, scale") {
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    ParamStore p = random_store({{"x", {5}}, {"y", {5}}}, 300 + s);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var v = t.gelu(t.param(ps, "x"));
            return to_scalar(t, v, 5, s);
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var v = t.scale(t.add(t.param(ps, "x"), t.param(ps, "y")), -1.7);
            return to_scalar(t, v, 5, s);
          }) < kTol);
  }
}

TEST_CASE("gradients: mean_rows, row, slice, concat, stack_rows") {
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    ParamStore p = random_store({{"M", {4, 3}}, {"a", {2}}, {"b", {3}}}, 400 + s);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            return to_scalar(t, t.mean_rows(t.param(ps, "M")), 3, s);
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            return to_scalar(t, t.row(t.param(ps, "M"), 2), 3, s);
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var c = t.concat({t.param(ps, "a"), t.param(ps, "b")});
            return to_scalar(t, t.slice(c, 1, 3), 3, s);
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var m = t.stack_rows({t.param(ps, "b"), t.param(ps, "b")});
            return to_scalar(t, t.mean_rows(m), 3, s);
          }) < kTol);
  }
}

TEST_CASE("gradients: softmax and weighted_rows") {
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    ParamStore p = random_store({{"w", {4}}, {"M", {4, 3}}}, 500 + s);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            return to_scalar(t, t.softmax(t.param(ps, "w")), 4, s);
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var y = t.weighted_rows(t.softmax(t.param(ps, "w")), t.param(ps, "M"));
            return to_scalar(t, y, 3, s);
          }) < kTol);
  }
}

TEST_CASE("gradients: loss heads") {
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    ParamStore p = random_store({{"x", {4}}, {"l", {1}}}, 600 + s);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            return t.mse(t.param(ps, "x"), random_vec(4, s));
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            return t.bce_logit(t.param(ps, "l"), float(s % 2));
          }) < kTol);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            return t.ce_logits(t.param(ps, "x"), int(s % 4));
          }) < kTol);
  }
}

TEST_CASE("gradients: mlp and denoiser composites") {
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    SplitMix64 g(700 + s);
    ParamStore p;
    mlp_init(p, "net", {3, 5, 2}, g);
    CHECK(max_grad_err(p, [&](Tape& t, ParamStore& ps) {
            Tape::Var x = t.leaf_vec(random_vec(3, s));
            return to_scalar(t, mlp_apply(t, ps, "net", 2, x), 2, s);
          }) < kTol);

    DenoiserConfig dc;
    dc.H = 2;
    dc.d_a = 3;
    dc.cond_dim = 4;
    dc.time_dim = 4;
    dc.hidden = 6;
    dc.T = 4;
    ParamStore q;
    SplitMix64 g2(800 + s);
    denoiser_init(q, "den", dc, g2);
    CHECK(max_grad_err(q, [&](Tape& t, ParamStore& ps) {
            Tape::Var noisy = t.leaf_vec(random_vec(dc.H * dc.d_a, s));
            Tape::Var cond = t.leaf_vec(random_vec(dc.cond_dim, s ^ 9));
            Tape::Var eps = denoiser_forward(t, ps, "den", dc, noisy, int(s % 4), cond);
            return to_scalar(t, eps, dc.H * dc.d_a, s);
          }) < kTol);
  }
}

TEST_CASE("adam drives a quadratic to its minimum and zeroes gradients") {
  ParamStore p;
  Tensor& x = p.add("x", {3});
  x.data = {5.0f, -4.0f, 0.5f};
  const std::vector<float> target = {3.0f, -1.0f, 2.0f};
  for (int it = 0; it < 2000; ++it) {
    Tape t;
    t.backward(t.mse(t.param(p, "x"), target));
    adam_step(p, 1e-2);
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(p.at("x").value.data[std::size_t(i)] ==
          doctest::Approx(target[std::size_t(i)]).epsilon(1e-3));
    CHECK(p.at("x").grad.data[std::size_t(i)] == 0.0f);
  }
  CHECK(p.adam_t == 2000);
}

TEST_CASE("parameter files round-trip and reject corruption") {
  SplitMix64 g(1);
  ParamStore p;
  p.add_init("a.W0", {4, 3}, g);
  p.add_init("a.b0", {4}, g);
  p.add_init("emb", {2, 5}, g);

  std::string path = "/tmp/mem0_test_params.mem0";
  save_params(p, path);
  ParamStore q = load_params(path);
  REQUIRE(q.entries.size() == p.entries.size());
  for (auto& [name, e] : p.entries) {
    REQUIRE(q.has(name));
    CHECK(q.at(name).value.shape == e.value.shape);
    CHECK(q.at(name).value.data == e.value.data);
  }

  std::string raw = read_file(path);
  std::string flipped = raw;
  flipped[raw.size() / 2] = char(flipped[raw.size() / 2] ^ 0x40);
  write_file(path, flipped);
  CHECK_THROWS_AS(load_params(path), IoError);
  write_file(path, raw.substr(0, raw.size() - 6));
  CHECK_THROWS_AS(load_params(path), IoError);
  write_file(path, std::string("ZZZZ") + raw.substr(4));
  CHECK_THROWS_AS(load_params(path), IoError);
  std::remove(path.c_str());
}

TEST_CASE("serialize_params is deterministic") {
  SplitMix64 g(2);
  ParamStore p;
  p.add_init("w", {3, 3}, g);
  CHECK(serialize_params(p) == serialize_params(p));
}

TEST_CASE("diffusion schedule is a valid linear ramp") {
  DiffusionSchedule s = DiffusionSchedule::make(16);
  REQUIRE(s.T == 16);
  REQUIRE(int(s.beta.size()) == 16);
  CHECK(s.beta.front() == doctest::Approx(2e-2));
  CHECK(s.beta.back() == doctest::Approx(5e-1));
  // Terminal signal level must be near zero: sampling starts from a
  // standard normal, so the last forward-noised step has to look like one.
  CHECK(s.alpha_bar.back() < 0.02);
  double ab = 1.0;
  for (int t = 0; t < 16; ++t) {
    CHECK(s.alpha[std::size_t(t)] == doctest::Approx(1.0 - s.beta[std::size_t(t)]));
    ab *= s.alpha[std::size_t(t)];
    CHECK(s.alpha_bar[std::size_t(t)] == doctest::Approx(ab));
    if (t > 0) CHECK(s.alpha_bar[std::size_t(t)] < s.alpha_bar[std::size_t(t) - 1]);
  }
}

TEST_CASE("forward noising matches the closed form") {
  DiffusionSchedule s = DiffusionSchedule::make(8);
  Tensor x0({4}), eps({4});
  x0.data = {1.0f, -2.0f, 0.5f, 3.0f};
  eps.data = {0.3f, 0.1f, -0.7f, 1.1f};
  for (int t = 0; t < 8; ++t) {
    Tensor xt = ddpm_forward_noise(s, x0, eps, t);
    double ab = s.alpha_bar[std::size_t(t)];
    for (int i = 0; i < 4; ++i)
      CHECK(xt.data[std::size_t(i)] ==
            doctest::Approx(std::sqrt(ab) * x0.data[std::size_t(i)] +
                            std::sqrt(1.0 - ab) * eps.data[std::size_t(i)]));
  }
}

TEST_CASE("one-step reverse mean inverts one-step noising exactly") {
  DiffusionSchedule s = DiffusionSchedule::make(1);
  Tensor x0({3}), eps({3});
  x0.data = {0.2f, -1.4f, 2.2f};
  eps.data = {1.0f, -0.3f, 0.6f};
  Tensor x1 = ddpm_forward_noise(s, x0, eps, 0);
  Tensor back = ddpm_reverse_mean(s, x1, eps, 0);
  for (int i = 0; i < 3; ++i)
    CHECK(back.data[std::size_t(i)] == doctest::Approx(x0.data[std::size_t(i)]).epsilon(1e-6));
}

TEST_CASE("sampling is deterministic in (params, cond, seed)") {
  DenoiserConfig dc;
  dc.H = 2;
  dc.d_a = 3;
  dc.cond_dim = 2;
  dc.time_dim = 4;
  dc.hidden = 8;
  dc.T = 4;
  DiffusionSchedule s = DiffusionSchedule::make(dc.T);
  SplitMix64 g(5);
  ParamStore p;
  denoiser_init(p, "den", dc, g);
  Tensor cond({2});
  cond.data = {0.5f, -0.5f};
  Tensor a = ddpm_sample(p, "den", dc, s, cond, 99);
  Tensor b = ddpm_sample(p, "den", dc, s, cond, 99);
  Tensor c = ddpm_sample(p, "den", dc, s, cond, 100);
  CHECK(a.shape == std::vector<int>{2, 3});
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
}

TEST_CASE("a small denoiser overfits a constant chunk") {
  DenoiserConfig dc;
  dc.H = 2;
  dc.d_a = 2;
  dc.cond_dim = 1;
  dc.time_dim = 4;
  dc.hidden = 16;
  dc.T = 16;
  DiffusionSchedule s = DiffusionSchedule::make(dc.T);
  SplitMix64 g(6);
  ParamStore p;
  denoiser_init(p, "den", dc, g);
  Tensor clean({4});
  clean.data = {1.0f, -1.0f, -1.0f, 1.0f};
  Tensor cond({1});
  cond.data = {1.0f};
  double sum_first = 0.0, sum_last = 0.0;
  const int iters = 3000;
  for (int it = 0; it < iters; ++it) {
    double loss = ddpm_loss(p, "den", dc, s, clean, cond, derive_seed(3, "ov", it));
    REQUIRE(std::isfinite(loss));
    adam_step(p, 3e-3);
    if (it < 100) sum_first += loss;
    if (it >= iters - 100) sum_last += loss;
  }
  CHECK(sum_last < 0.5 * sum_first);

  // Sampled chunks should decode (per-row argmax) to the training actions.
  int good = 0;
  for (int k = 0; k < 50; ++k) {
    Tensor out = ddpm_sample(p, "den", dc, s, cond, 1000 + std::uint64_t(k));
    bool row0 = out.data[0] > out.data[1];
    bool row1 = out.data[3] > out.data[2];
    if (row0 && row1) ++good;
  }
  CHECK(good >= 35);
}
