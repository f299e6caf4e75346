#include "mem0/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mem0/rng.hpp"
#include "mem0/util.hpp"

namespace mem0 {

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  std::size_t n = 1;
  for (int d : shape) n *= std::size_t(d);
  data.assign(n, 0.0f);
}

float& Tensor::at(int i, int j) { return data[std::size_t(i) * std::size_t(cols()) + std::size_t(j)]; }

Tensor& ParamStore::add(const std::string& name, std::vector<int> shape) {
  if (entries.count(name)) throw ContractError("duplicate parameter name: " + name);
  Entry e;
  e.value = Tensor(shape);
  e.grad = Tensor(shape);
  e.m = Tensor(shape);
  e.v = Tensor(shape);
  return entries.emplace(name, std::move(e)).first->second.value;
}

Tensor& ParamStore::add_init(const std::string& name, std::vector<int> shape,
                             SplitMix64& rng) {
  Tensor& t = add(name, std::move(shape));
  // Rank-1 parameters are biases and start at zero.
  bool is_bias = t.shape.size() == 1;
  if (!is_bias) {
    int fan_in = t.shape.size() >= 2 ? t.shape[1] : t.shape[0];
    double s = 1.0 / std::sqrt(double(std::max(1, fan_in)));
    for (float& x : t.data) x = float(rng.gaussian() * s);
  }
  return t;
}

ParamStore::Entry& ParamStore::at(const std::string& name) {
  auto it = entries.find(name);
  if (it == entries.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, e] : entries) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0f);
}

void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps) {
  ++store.adam_t;
  double bc1 = 1.0 - std::pow(beta1, double(store.adam_t));
  double bc2 = 1.0 - std::pow(beta2, double(store.adam_t));
  for (auto& [name, e] : store.entries) {
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      double g = e.grad.data[i];
      double m = beta1 * e.m.data[i] + (1.0 - beta1) * g;
      double v = beta2 * e.v.data[i] + (1.0 - beta2) * g * g;
      e.m.data[i] = float(m);
      e.v.data[i] = float(v);
      double update = lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
      e.value.data[i] = float(e.value.data[i] - update);
    }
  }
  store.zero_grads();
}

namespace {

void put_u8(std::string& out, std::uint8_t v) { out.push_back(char(v)); }
void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}
void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

struct WReader {
  const std::string& s;
  std::size_t pos = 0;
  explicit WReader(const std::string& str) : s(str) {}
  void need(std::size_t n) const {
    if (pos + n > s.size()) throw IoError("weight file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return std::uint8_t(s[pos++]);
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = std::uint16_t(std::uint8_t(s[pos])) |
                      std::uint16_t(std::uint8_t(s[pos + 1])) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(s[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string v = s.substr(pos, n);
    pos += n;
    return v;
  }
};

}  // namespace

std::string serialize_params(const ParamStore& store) {
  std::string out = "MEM0";
  put_u16le(out, 1);
  put_u32le(out, std::uint32_t(store.entries.size()));
  for (const auto& [name, e] : store.entries) {
    put_u32le(out, std::uint32_t(name.size()));
    out += name;
    put_u8(out, std::uint8_t(e.value.shape.size()));
    for (int d : e.value.shape) put_u32le(out, std::uint32_t(d));
    for (float f : e.value.data) {
      std::uint32_t bits;
      static_assert(sizeof(bits) == sizeof(f));
      std::memcpy(&bits, &f, 4);
      put_u32le(out, bits);
    }
  }
  put_u32le(out, crc32(out.data(), out.size()));
  return out;
}

void save_params(const ParamStore& store, const std::string& path) {
  write_file(path, serialize_params(store));
}

ParamStore load_params(const std::string& path) {
  std::string raw = read_file(path);
  if (raw.size() < 14) throw IoError("weight file truncated");
  std::string body = raw.substr(0, raw.size() - 4);
  WReader tail(raw);
  tail.pos = raw.size() - 4;
  if (tail.u32() != crc32(body.data(), body.size()))
    throw IoError("weight file: checksum failure");
  WReader r(body);
  if (r.bytes(4) != "MEM0") throw IoError("weight file: bad magic");
  if (r.u16() != 1) throw IoError("weight file: unsupported version");
  std::uint32_t count = r.u32();
  ParamStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = r.u32();
    std::string name = r.bytes(name_len);
    std::uint8_t rank = r.u8();
    if (rank > 3) throw IoError("weight file: bad rank for parameter " + name);
    std::vector<int> shape;
    for (int d = 0; d < rank; ++d) shape.push_back(int(r.u32()));
    Tensor& t = store.add(name, shape);
    for (float& f : t.data) {
      std::uint32_t bits = r.u32();
      std::memcpy(&f, &bits, 4);
    }
  }
  return store;
}

// ---------------------------------------------------------------------------
// Tape

Tape::Var Tape::make(std::vector<int> shape) {
  Node n;
  n.shape = std::move(shape);
  std::size_t sz = 1;
  for (int d : n.shape) sz *= std::size_t(d);
  n.val.assign(sz, 0.0);
  n.grad.assign(sz, 0.0);
  nodes_.push_back(std::move(n));
  return Var(nodes_.size() - 1);
}

Tape::Var Tape::leaf(const Tensor& t) {
  Var v = make(t.shape);
  for (std::size_t i = 0; i < t.data.size(); ++i) nodes_[std::size_t(v)].val[i] = t.data[i];
  return v;
}

Tape::Var Tape::leaf_vec(const std::vector<float>& v) {
  Tensor t({int(v.size())});
  t.data.assign(v.begin(), v.end());
  return leaf(t);
}

Tape::Var Tape::param(ParamStore& store, const std::string& name) {
  ParamStore::Entry& e = store.at(name);
  Var v = leaf(e.value);
  nodes_[std::size_t(v)].store = &store;
  nodes_[std::size_t(v)].pname = name;
  return v;
}

Tape::Var Tape::linear(Var W, Var b, Var x) {
  const Node& w = nodes_[std::size_t(W)];
  const Node& xn = nodes_[std::size_t(x)];
  if (w.shape.size() != 2 || xn.shape.size() != 1 || w.shape[1] != xn.shape[0])
    throw ContractError("linear: shape mismatch");
  int out = w.shape[0], in = w.shape[1];
  if (b >= 0 && (nodes_[std::size_t(b)].shape.size() != 1 ||
                 nodes_[std::size_t(b)].shape[0] != out))
    throw ContractError("linear: bias shape mismatch");
  Var y = make({out});
  Node& yn = nodes_[std::size_t(y)];
  for (int i = 0; i < out; ++i) {
    double acc = b >= 0 ? nodes_[std::size_t(b)].val[std::size_t(i)] : 0.0;
    const double* wr = &w.val[std::size_t(i) * std::size_t(in)];
    for (int j = 0; j < in; ++j) acc += wr[j] * xn.val[std::size_t(j)];
    yn.val[std::size_t(i)] = acc;
  }
  yn.bw = [W, b, x, y, out, in](Tape& t) {
    Node& wn = t.nodes_[std::size_t(W)];
    Node& xn2 = t.nodes_[std::size_t(x)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (int i = 0; i < out; ++i) {
      double g = yn2.grad[std::size_t(i)];
      if (b >= 0) t.nodes_[std::size_t(b)].grad[std::size_t(i)] += g;
      for (int j = 0; j < in; ++j) {
        wn.grad[std::size_t(i) * std::size_t(in) + std::size_t(j)] +=
            g * xn2.val[std::size_t(j)];
        xn2.grad[std::size_t(j)] += g * wn.val[std::size_t(i) * std::size_t(in) + std::size_t(j)];
      }
    }
  };
  return y;
}

Tape::Var Tape::matmul(Var A, Var B) {
  const Node& a = nodes_[std::size_t(A)];
  const Node& bn = nodes_[std::size_t(B)];
  if (a.shape.size() != 2 || bn.shape.size() != 2 || a.shape[1] != bn.shape[0])
    throw ContractError("matmul: shape mismatch");
  int R = a.shape[0], K = a.shape[1], C = bn.shape[1];
  Var y = make({R, C});
  Node& yn = nodes_[std::size_t(y)];
  for (int i = 0; i < R; ++i)
    for (int k = 0; k < K; ++k) {
      double av = a.val[std::size_t(i * K + k)];
      for (int j = 0; j < C; ++j)
        yn.val[std::size_t(i * C + j)] += av * bn.val[std::size_t(k * C + j)];
    }
  yn.bw = [A, B, y, R, K, C](Tape& t) {
    Node& an = t.nodes_[std::size_t(A)];
    Node& bn2 = t.nodes_[std::size_t(B)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) {
        double g = yn2.grad[std::size_t(i * C + j)];
        for (int k = 0; k < K; ++k) {
          an.grad[std::size_t(i * K + k)] += g * bn2.val[std::size_t(k * C + j)];
          bn2.grad[std::size_t(k * C + j)] += g * an.val[std::size_t(i * K + k)];
        }
      }
  };
  return y;
}

namespace {
const double kInvSqrt2 = 0.7071067811865475244;
const double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Tape::Var Tape::gelu(Var x) {
  const Node& xn = nodes_[std::size_t(x)];
  Var y = make(xn.shape);
  Node& yn = nodes_[std::size_t(y)];
  for (std::size_t i = 0; i < xn.val.size(); ++i) {
    double v = xn.val[i];
    yn.val[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
  yn.bw = [x, y](Tape& t) {
    Node& xn2 = t.nodes_[std::size_t(x)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (std::size_t i = 0; i < xn2.val.size(); ++i) {
      double v = xn2.val[i];
      double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      xn2.grad[i] += yn2.grad[i] * (cdf + v * pdf);
    }
  };
  return y;
}

Tape::Var Tape::mean_rows(Var x) {
  const Node& xn = nodes_[std::size_t(x)];
  if (xn.shape.size() != 2 || xn.shape[0] == 0)
    throw ContractError("mean_rows: needs a nonempty rank-2 input");
  int R = xn.shape[0], C = xn.shape[1];
  Var y = make({C});
  Node& yn = nodes_[std::size_t(y)];
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) yn.val[std::size_t(j)] += xn.val[std::size_t(i * C + j)] / R;
  yn.bw = [x, y, R, C](Tape& t) {
    Node& xn2 = t.nodes_[std::size_t(x)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j)
        xn2.grad[std::size_t(i * C + j)] += yn2.grad[std::size_t(j)] / R;
  };
  return y;
}

Tape::Var Tape::concat(const std::vector<Var>& xs) {
  int total = 0;
  for (Var v : xs) {
    if (nodes_[std::size_t(v)].shape.size() != 1) throw ContractError("concat: rank-1 only");
    total += nodes_[std::size_t(v)].shape[0];
  }
  Var y = make({total});
  Node& yn = nodes_[std::size_t(y)];
  int off = 0;
  for (Var v : xs) {
    const Node& n = nodes_[std::size_t(v)];
    for (std::size_t i = 0; i < n.val.size(); ++i) yn.val[std::size_t(off) + i] = n.val[i];
    off += n.shape[0];
  }
  std::vector<Var> parts = xs;
  yn.bw = [parts, y](Tape& t) {
    Node& yn2 = t.nodes_[std::size_t(y)];
    int off2 = 0;
    for (Var v : parts) {
      Node& n = t.nodes_[std::size_t(v)];
      for (std::size_t i = 0; i < n.grad.size(); ++i) n.grad[i] += yn2.grad[std::size_t(off2) + i];
      off2 += n.shape[0];
    }
  };
  return y;
}

Tape::Var Tape::stack_rows(const std::vector<Var>& xs) {
  if (xs.empty()) throw ContractError("stack_rows: empty input");
  int C = nodes_[std::size_t(xs[0])].shape[0];
  for (Var v : xs)
    if (nodes_[std::size_t(v)].shape.size() != 1 || nodes_[std::size_t(v)].shape[0] != C)
      throw ContractError("stack_rows: shape mismatch");
  Var y = make({int(xs.size()), C});
  Node& yn = nodes_[std::size_t(y)];
  for (std::size_t r = 0; r < xs.size(); ++r)
    for (int j = 0; j < C; ++j)
      yn.val[r * std::size_t(C) + std::size_t(j)] = nodes_[std::size_t(xs[r])].val[std::size_t(j)];
  std::vector<Var> parts = xs;
  yn.bw = [parts, y, C](Tape& t) {
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (std::size_t r = 0; r < parts.size(); ++r) {
      Node& n = t.nodes_[std::size_t(parts[r])];
      for (int j = 0; j < C; ++j)
        n.grad[std::size_t(j)] += yn2.grad[r * std::size_t(C) + std::size_t(j)];
    }
  };
  return y;
}

Tape::Var Tape::row(Var M, int i) {
  const Node& mn = nodes_[std::size_t(M)];
  if (mn.shape.size() != 2 || i < 0 || i >= mn.shape[0])
    throw ContractError("row: index out of range");
  int C = mn.shape[1];
  Var y = make({C});
  Node& yn = nodes_[std::size_t(y)];
  for (int j = 0; j < C; ++j) yn.val[std::size_t(j)] = mn.val[std::size_t(i * C + j)];
  yn.bw = [M, i, y, C](Tape& t) {
    Node& mn2 = t.nodes_[std::size_t(M)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (int j = 0; j < C; ++j) mn2.grad[std::size_t(i * C + j)] += yn2.grad[std::size_t(j)];
  };
  return y;
}

Tape::Var Tape::slice(Var x, int offset, int len) {
  const Node& xn = nodes_[std::size_t(x)];
  if (xn.shape.size() != 1 || offset < 0 || len < 1 || offset + len > xn.shape[0])
    throw ContractError("slice: out of range");
  Var y = make({len});
  Node& yn = nodes_[std::size_t(y)];
  for (int j = 0; j < len; ++j) yn.val[std::size_t(j)] = xn.val[std::size_t(offset + j)];
  yn.bw = [x, y, offset, len](Tape& t) {
    Node& xn2 = t.nodes_[std::size_t(x)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (int j = 0; j < len; ++j) xn2.grad[std::size_t(offset + j)] += yn2.grad[std::size_t(j)];
  };
  return y;
}

Tape::Var Tape::matvec(Var M, Var x) {
  const Node& mn = nodes_[std::size_t(M)];
  const Node& xn = nodes_[std::size_t(x)];
  if (mn.shape.size() != 2 || xn.shape.size() != 1 || mn.shape[1] != xn.shape[0])
    throw ContractError("matvec: shape mismatch");
  int R = mn.shape[0], C = mn.shape[1];
  Var y = make({R});
  Node& yn = nodes_[std::size_t(y)];
  for (int i = 0; i < R; ++i) {
    double acc = 0.0;
    for (int j = 0; j < C; ++j) acc += mn.val[std::size_t(i * C + j)] * xn.val[std::size_t(j)];
    yn.val[std::size_t(i)] = acc;
  }
  yn.bw = [M, x, y, R, C](Tape& t) {
    Node& mn2 = t.nodes_[std::size_t(M)];
    Node& xn2 = t.nodes_[std::size_t(x)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (int i = 0; i < R; ++i) {
      double g = yn2.grad[std::size_t(i)];
      for (int j = 0; j < C; ++j) {
        mn2.grad[std::size_t(i * C + j)] += g * xn2.val[std::size_t(j)];
        xn2.grad[std::size_t(j)] += g * mn2.val[std::size_t(i * C + j)];
      }
    }
  };
  return y;
}

Tape::Var Tape::add(Var a, Var b) {
  const Node& an = nodes_[std::size_t(a)];
  if (an.shape != nodes_[std::size_t(b)].shape) throw ContractError("add: shape mismatch");
  Var y = make(an.shape);
  Node& yn = nodes_[std::size_t(y)];
  for (std::size_t i = 0; i < yn.val.size(); ++i)
    yn.val[i] = an.val[i] + nodes_[std::size_t(b)].val[i];
  yn.bw = [a, b, y](Tape& t) {
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (std::size_t i = 0; i < yn2.grad.size(); ++i) {
      t.nodes_[std::size_t(a)].grad[i] += yn2.grad[i];
      t.nodes_[std::size_t(b)].grad[i] += yn2.grad[i];
    }
  };
  return y;
}

Tape::Var Tape::scale(Var x, double c) {
  const Node& xn = nodes_[std::size_t(x)];
  Var y = make(xn.shape);
  Node& yn = nodes_[std::size_t(y)];
  for (std::size_t i = 0; i < yn.val.size(); ++i) yn.val[i] = xn.val[i] * c;
  yn.bw = [x, y, c](Tape& t) {
    for (std::size_t i = 0; i < t.nodes_[std::size_t(y)].grad.size(); ++i)
      t.nodes_[std::size_t(x)].grad[i] += t.nodes_[std::size_t(y)].grad[i] * c;
  };
  return y;
}

Tape::Var Tape::softmax(Var x) {
  const Node& xn = nodes_[std::size_t(x)];
  if (xn.shape.size() != 1) throw ContractError("softmax: rank-1 only");
  Var y = make(xn.shape);
  Node& yn = nodes_[std::size_t(y)];
  double mx = *std::max_element(xn.val.begin(), xn.val.end());
  double z = 0.0;
  for (std::size_t i = 0; i < xn.val.size(); ++i) z += std::exp(xn.val[i] - mx);
  for (std::size_t i = 0; i < xn.val.size(); ++i) yn.val[i] = std::exp(xn.val[i] - mx) / z;
  yn.bw = [x, y](Tape& t) {
    Node& xn2 = t.nodes_[std::size_t(x)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    double dot = 0.0;
    for (std::size_t i = 0; i < yn2.val.size(); ++i) dot += yn2.grad[i] * yn2.val[i];
    for (std::size_t i = 0; i < yn2.val.size(); ++i)
      xn2.grad[i] += yn2.val[i] * (yn2.grad[i] - dot);
  };
  return y;
}

Tape::Var Tape::weighted_rows(Var w, Var M) {
  const Node& wn = nodes_[std::size_t(w)];
  const Node& mn = nodes_[std::size_t(M)];
  if (wn.shape.size() != 1 || mn.shape.size() != 2 || wn.shape[0] != mn.shape[0])
    throw ContractError("weighted_rows: shape mismatch");
  int R = mn.shape[0], C = mn.shape[1];
  Var y = make({C});
  Node& yn = nodes_[std::size_t(y)];
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j)
      yn.val[std::size_t(j)] += wn.val[std::size_t(i)] * mn.val[std::size_t(i * C + j)];
  yn.bw = [w, M, y, R, C](Tape& t) {
    Node& wn2 = t.nodes_[std::size_t(w)];
    Node& mn2 = t.nodes_[std::size_t(M)];
    Node& yn2 = t.nodes_[std::size_t(y)];
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) {
        wn2.grad[std::size_t(i)] += yn2.grad[std::size_t(j)] * mn2.val[std::size_t(i * C + j)];
        mn2.grad[std::size_t(i * C + j)] += yn2.grad[std::size_t(j)] * wn2.val[std::size_t(i)];
      }
  };
  return y;
}

Tape::Var Tape::mse(Var pred, const std::vector<float>& target) {
  const Node& pn = nodes_[std::size_t(pred)];
  if (pn.val.size() != target.size()) throw ContractError("mse: size mismatch");
  Var y = make({1});
  Node& yn = nodes_[std::size_t(y)];
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    double d = pn.val[i] - target[i];
    acc += d * d;
  }
  yn.val[0] = acc / double(target.size());
  std::vector<float> tgt = target;
  yn.bw = [pred, y, tgt](Tape& t) {
    Node& pn2 = t.nodes_[std::size_t(pred)];
    double g = t.nodes_[std::size_t(y)].grad[0] * 2.0 / double(tgt.size());
    for (std::size_t i = 0; i < tgt.size(); ++i)
      pn2.grad[i] += g * (pn2.val[i] - tgt[i]);
  };
  return y;
}

Tape::Var Tape::bce_logit(Var logit, float target) {
  const Node& ln = nodes_[std::size_t(logit)];
  if (ln.val.size() != 1) throw ContractError("bce_logit: scalar logit expected");
  Var y = make({1});
  Node& yn = nodes_[std::size_t(y)];
  double z = ln.val[0];
  // log(1 + e^z) computed stably.
  double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  yn.val[0] = softplus - double(target) * z;
  yn.bw = [logit, y, target](Tape& t) {
    double z2 = t.nodes_[std::size_t(logit)].val[0];
    double sig = 1.0 / (1.0 + std::exp(-z2));
    t.nodes_[std::size_t(logit)].grad[0] += t.nodes_[std::size_t(y)].grad[0] * (sig - target);
  };
  return y;
}

Tape::Var Tape::ce_logits(Var logits, int label) {
  const Node& ln = nodes_[std::size_t(logits)];
  if (ln.shape.size() != 1 || label < 0 || label >= ln.shape[0])
    throw ContractError("ce_logits: bad label");
  Var y = make({1});
  Node& yn = nodes_[std::size_t(y)];
  double mx = *std::max_element(ln.val.begin(), ln.val.end());
  double z = 0.0;
  for (double v : ln.val) z += std::exp(v - mx);
  yn.val[0] = std::log(z) + mx - ln.val[std::size_t(label)];
  yn.bw = [logits, y, label, mx, z](Tape& t) {
    Node& ln2 = t.nodes_[std::size_t(logits)];
    double g = t.nodes_[std::size_t(y)].grad[0];
    for (std::size_t i = 0; i < ln2.val.size(); ++i) {
      double p = std::exp(ln2.val[i] - mx) / z;
      ln2.grad[i] += g * (p - (int(i) == label ? 1.0 : 0.0));
    }
  };
  return y;
}

void Tape::backward(Var loss_node) {
  Node& ln = nodes_[std::size_t(loss_node)];
  if (ln.val.size() != 1) throw ContractError("backward: loss must be scalar");
  ln.grad[0] = 1.0;
  for (int i = loss_node; i >= 0; --i)
    if (nodes_[std::size_t(i)].bw) nodes_[std::size_t(i)].bw(*this);
  for (Node& n : nodes_)
    if (n.store) {
      Tensor& g = n.store->at(n.pname).grad;
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = float(g.data[i] + n.grad[i]);
    }
}

Tensor Tape::tensor(Var v) const {
  const Node& n = nodes_[std::size_t(v)];
  Tensor t(n.shape);
  for (std::size_t i = 0; i < n.val.size(); ++i) t.data[i] = float(n.val[i]);
  return t;
}

Tape::Var mlp_apply(Tape& t, ParamStore& p, const std::string& prefix, int layers,
                    Tape::Var x) {
  for (int l = 0; l < layers; ++l) {
    Tape::Var W = t.param(p, prefix + ".W" + std::to_string(l));
    Tape::Var b = t.param(p, prefix + ".b" + std::to_string(l));
    x = t.linear(W, b, x);
    if (l + 1 < layers) x = t.gelu(x);
  }
  return x;
}

void mlp_init(ParamStore& p, const std::string& prefix, const std::vector<int>& dims,
              SplitMix64& rng) {
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    p.add_init(prefix + ".W" + std::to_string(l), {dims[l + 1], dims[l]}, rng);
    p.add_init(prefix + ".b" + std::to_string(l), {dims[l + 1]}, rng);
  }
}

}  // namespace mem0
