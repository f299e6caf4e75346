#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mem0 {

class SplitMix64;

// Dense row-major tensor, rank <= 3, 32-bit float storage.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  std::size_t size() const { return data.size(); }
  float& at(int i) { return data[std::size_t(i)]; }
  float& at(int i, int j);
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
};

// Named parameters with paired gradient accumulators and Adam moments.
// std::map keeps iteration order deterministic.
struct ParamStore {
  struct Entry {
    Tensor value, grad, m, v;
  };
  std::map<std::string, Entry> entries;
  std::int64_t adam_t = 0;

  Tensor& add(const std::string& name, std::vector<int> shape);
  // Gaussian init scaled by 1/sqrt(fan_in); biases (rank-1 names ending in
  // ".b") start at zero.
  Tensor& add_init(const std::string& name, std::vector<int> shape, SplitMix64& rng);
  Entry& at(const std::string& name);
  bool has(const std::string& name) const { return entries.count(name) != 0; }
  void zero_grads();
};

// Adaptive-moment update with bias correction; zeroes gradients afterward.
void adam_step(ParamStore& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

// Weight persistence: magic "MEM0", u16 version, u32 tensor count, per-tensor
// records (u32 name length + name, u8 rank, u32 dims, little-endian f32
// payload), trailing CRC32 of everything before it.
std::string serialize_params(const ParamStore& store);
void save_params(const ParamStore& store, const std::string& path);
ParamStore load_params(const std::string& path);

// Reverse-mode tape over a fixed op set. Node math runs in double for
// gradient-check headroom; leaves come from float tensors.
class Tape {
 public:
  using Var = int;

  Var leaf(const Tensor& t);
  Var leaf_vec(const std::vector<float>& v);
  // Leaf bound to a named parameter; backward() accumulates its gradient
  // into the store.
  Var param(ParamStore& store, const std::string& name);

  // y = W x + b. W: (out, in); b: (out) or -1 for none; x: (in).
  Var linear(Var W, Var b, Var x);
  // C = A B. A: (R, K); B: (K, C).
  Var matmul(Var A, Var B);
  Var gelu(Var x);                 // exact erf form, elementwise
  Var mean_rows(Var x);            // (R, C) -> (C); errors on R == 0
  Var concat(const std::vector<Var>& xs);  // rank-1 concat
  Var stack_rows(const std::vector<Var>& xs);  // n rank-1 -> (n, C)
  Var row(Var M, int i);           // (R, C) -> (C), embedding lookup
  Var slice(Var x, int offset, int len);  // rank-1 contiguous slice
  Var matvec(Var M, Var x);        // (R, C) x (C) -> (R)
  Var add(Var a, Var b);
  Var scale(Var x, double c);
  Var softmax(Var x);              // rank-1
  // y = w^T M: weighted sum of rows. w: (R); M: (R, C).
  Var weighted_rows(Var w, Var M);

  // Scalar losses.
  Var mse(Var pred, const std::vector<float>& target);
  Var bce_logit(Var logit, float target);        // logit: shape (1)
  Var ce_logits(Var logits, int label);

  void backward(Var loss_node);  // seeds d(loss)=1, accumulates param grads

  const std::vector<double>& value(Var v) const { return nodes_[std::size_t(v)].val; }
  const std::vector<double>& grad(Var v) const { return nodes_[std::size_t(v)].grad; }
  const std::vector<int>& shape(Var v) const { return nodes_[std::size_t(v)].shape; }
  Tensor tensor(Var v) const;

 private:
  struct Node {
    std::vector<int> shape;
    std::vector<double> val, grad;
    std::function<void(Tape&)> bw;
    ParamStore* store = nullptr;
    std::string pname;
  };
  // Deque keeps node references stable while ops append new nodes.
  std::deque<Node> nodes_;
  Var make(std::vector<int> shape);
};

// Small utility used by model code: apply an MLP named prefix.W0/.b0 ...
// with GELU between layers (none after the last).
Tape::Var mlp_apply(Tape& t, ParamStore& p, const std::string& prefix, int layers,
                    Tape::Var x);
void mlp_init(ParamStore& p, const std::string& prefix, const std::vector<int>& dims,
              SplitMix64& rng);

}  // namespace mem0
