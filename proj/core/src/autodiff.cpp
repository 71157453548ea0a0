#include "taaco/autodiff.hpp"

#include <cmath>
#include <memory>

namespace taaco {

namespace {
constexpr double kBceClampLo = 1e-7;
constexpr double kBceClampHi = 1.0 - 1e-7;

void check_2d(const Tensor& t, const char* what) {
  if (t.rank() != 2) raise(ErrorCode::ShapeMismatch, std::string(what) + " must be 2-D");
}
}  // namespace

Graph::Var Graph::push(Tensor value, bool wants_grad, std::function<void(Graph&)> back) {
  Node node;
  node.owned_value = std::move(value);
  node.wants_grad = wants_grad;
  if (wants_grad) node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return static_cast<Var>(nodes_.size() - 1);
}

Graph::Var Graph::constant(Tensor v) {
  check_2d(v, "constant");
  return push(std::move(v), false, nullptr);
}

Graph::Var Graph::leaf(Parameter& p) {
  check_2d(p.value, "leaf");
  Node node;
  node.bound = &p;
  node.wants_grad = true;
  nodes_.push_back(std::move(node));
  return static_cast<Var>(nodes_.size() - 1);
}

Tensor& Graph::grad_buf(Var v) {
  Node& n = nodes_[static_cast<size_t>(v)];
  if (n.grad.empty()) n.grad = Tensor(val(v).shape());
  return n.grad;
}

const Tensor& Graph::value(Var v) const { return val(v); }

const Tensor& Graph::grad(Var v) { return grad_buf(v); }

void Graph::clear() { nodes_.clear(); }

void Graph::backward(Var root, double seed) {
  const Tensor& rv = val(root);
  if (rv.size() != 1) raise(ErrorCode::ShapeMismatch, "backward root must be a scalar");
  grad_buf(root)[0] += seed;
  for (Var v = root; v >= 0; --v) {
    Node& n = nodes_[static_cast<size_t>(v)];
    if (!n.wants_grad || n.grad.empty()) continue;
    if (n.back) {
      n.back(*this);
    } else if (n.bound) {
      double* g = n.bound->grad.data();
      const double* d = n.grad.data();
      for (int64_t i = 0; i < n.grad.size(); ++i) g[i] += d[i];
    }
  }
}

Graph::Var Graph::matmul(Var a, Var b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  Tensor C(A.rows(), B.cols());
  gemm_nn(A, B, C);
  bool wg = wants(a) || wants(b);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, b, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      if (g.wants(a)) gemm_nt(dC, g.val(b), g.grad_buf(a), /*accumulate=*/true);
      if (g.wants(b)) gemm_tn(g.val(a), dC, g.grad_buf(b), /*accumulate=*/true);
    };
  }
  return self;
}

Graph::Var Graph::matmul_nt(Var a, Var b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  Tensor C(A.rows(), B.rows());
  gemm_nt(A, B, C);
  bool wg = wants(a) || wants(b);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, b, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      if (g.wants(a)) gemm_nn(dC, g.val(b), g.grad_buf(a), /*accumulate=*/true);
      if (g.wants(b)) gemm_tn(dC, g.val(a), g.grad_buf(b), /*accumulate=*/true);
    };
  }
  return self;
}

Graph::Var Graph::add(Var a, Var b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (!A.same_shape(B)) {
    raise(ErrorCode::ShapeMismatch, "add " + A.shape_string() + " vs " + B.shape_string());
  }
  Tensor C = A;
  const double* bd = B.data();
  double* cd = C.data();
  for (int64_t i = 0; i < C.size(); ++i) cd[i] += bd[i];
  bool wg = wants(a) || wants(b);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, b, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      for (Var p : {a, b}) {
        if (!g.wants(p)) continue;
        double* gp = g.grad_buf(p).data();
        const double* d = dC.data();
        for (int64_t i = 0; i < dC.size(); ++i) gp[i] += d[i];
      }
    };
  }
  return self;
}

Graph::Var Graph::add_row(Var a, Var bias) {
  const Tensor& A = val(a);
  const Tensor& B = val(bias);
  if (B.rows() != 1 || B.cols() != A.cols()) {
    raise(ErrorCode::ShapeMismatch, "add_row " + A.shape_string() + " vs " + B.shape_string());
  }
  Tensor C = A;
  for (int64_t i = 0; i < C.rows(); ++i) {
    for (int64_t j = 0; j < C.cols(); ++j) C.at(i, j) += B[j];
  }
  bool wg = wants(a) || wants(bias);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, bias, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      if (g.wants(a)) {
        double* gp = g.grad_buf(a).data();
        const double* d = dC.data();
        for (int64_t i = 0; i < dC.size(); ++i) gp[i] += d[i];
      }
      if (g.wants(bias)) {
        Tensor& gb = g.grad_buf(bias);
        for (int64_t i = 0; i < dC.rows(); ++i) {
          for (int64_t j = 0; j < dC.cols(); ++j) gb[j] += dC.at(i, j);
        }
      }
    };
  }
  return self;
}

Graph::Var Graph::scale(Var a, double s) {
  Tensor C = val(a);
  double* cd = C.data();
  for (int64_t i = 0; i < C.size(); ++i) cd[i] *= s;
  bool wg = wants(a);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, s, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      double* gp = g.grad_buf(a).data();
      const double* d = dC.data();
      for (int64_t i = 0; i < dC.size(); ++i) gp[i] += s * d[i];
    };
  }
  return self;
}

Graph::Var Graph::relu(Var a) {
  Tensor C = val(a);
  double* cd = C.data();
  for (int64_t i = 0; i < C.size(); ++i) cd[i] = cd[i] > 0.0 ? cd[i] : 0.0;
  bool wg = wants(a);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      const Tensor& x = g.val(a);
      double* gp = g.grad_buf(a).data();
      const double* d = dC.data();
      const double* xd = x.data();
      for (int64_t i = 0; i < dC.size(); ++i) {
        if (xd[i] > 0.0) gp[i] += d[i];
      }
    };
  }
  return self;
}

Graph::Var Graph::softmax_rows(Var a) {
  const Tensor& A = val(a);
  Tensor C(A.rows(), A.cols());
  for (int64_t i = 0; i < A.rows(); ++i) {
    double mx = A.at(i, 0);
    for (int64_t j = 1; j < A.cols(); ++j) mx = std::max(mx, A.at(i, j));
    double sum = 0.0;
    for (int64_t j = 0; j < A.cols(); ++j) {
      double e = std::exp(A.at(i, j) - mx);
      C.at(i, j) = e;
      sum += e;
    }
    double inv = 1.0 / sum;
    for (int64_t j = 0; j < A.cols(); ++j) C.at(i, j) *= inv;
  }
  bool wg = wants(a);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, self](Graph& g) {
      const Tensor& p = g.val(self);
      const Tensor& dC = g.nodes_[self].grad;
      Tensor& gp = g.grad_buf(a);
      for (int64_t i = 0; i < p.rows(); ++i) {
        double dot = 0.0;
        for (int64_t j = 0; j < p.cols(); ++j) dot += dC.at(i, j) * p.at(i, j);
        for (int64_t j = 0; j < p.cols(); ++j) {
          gp.at(i, j) += p.at(i, j) * (dC.at(i, j) - dot);
        }
      }
    };
  }
  return self;
}

Graph::Var Graph::layer_norm_rows(Var x, Var gamma, Var beta, double eps) {
  const Tensor& X = val(x);
  const Tensor& G = val(gamma);
  const Tensor& B = val(beta);
  int64_t n = X.rows(), d = X.cols();
  if (G.rows() != 1 || G.cols() != d || B.rows() != 1 || B.cols() != d) {
    raise(ErrorCode::ShapeMismatch, "layer_norm affine params must be [1," + std::to_string(d) + "]");
  }
  auto xhat = std::make_shared<Tensor>(n, d);
  auto inv_sigma = std::make_shared<std::vector<double>>(static_cast<size_t>(n));
  Tensor C(n, d);
  for (int64_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int64_t j = 0; j < d; ++j) mean += X.at(i, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t j = 0; j < d; ++j) {
      double c = X.at(i, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[static_cast<size_t>(i)] = inv;
    for (int64_t j = 0; j < d; ++j) {
      double xh = (X.at(i, j) - mean) * inv;
      xhat->at(i, j) = xh;
      C.at(i, j) = G[j] * xh + B[j];
    }
  }
  bool wg = wants(x) || wants(gamma) || wants(beta);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [x, gamma, beta, self, xhat, inv_sigma](Graph& g) {
      const Tensor& dY = g.nodes_[self].grad;
      const Tensor& G = g.val(gamma);
      int64_t n = dY.rows(), d = dY.cols();
      if (g.wants(gamma)) {
        Tensor& gg = g.grad_buf(gamma);
        for (int64_t i = 0; i < n; ++i) {
          for (int64_t j = 0; j < d; ++j) gg[j] += dY.at(i, j) * xhat->at(i, j);
        }
      }
      if (g.wants(beta)) {
        Tensor& gb = g.grad_buf(beta);
        for (int64_t i = 0; i < n; ++i) {
          for (int64_t j = 0; j < d; ++j) gb[j] += dY.at(i, j);
        }
      }
      if (g.wants(x)) {
        Tensor& gx = g.grad_buf(x);
        for (int64_t i = 0; i < n; ++i) {
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int64_t j = 0; j < d; ++j) {
            double dxh = dY.at(i, j) * G[j];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xhat->at(i, j);
          }
          mean_dxhat /= static_cast<double>(d);
          mean_dxhat_xhat /= static_cast<double>(d);
          double inv = (*inv_sigma)[static_cast<size_t>(i)];
          for (int64_t j = 0; j < d; ++j) {
            double dxh = dY.at(i, j) * G[j];
            gx.at(i, j) += inv * (dxh - mean_dxhat - xhat->at(i, j) * mean_dxhat_xhat);
          }
        }
      }
    };
  }
  return self;
}

Graph::Var Graph::slice_cols(Var a, int64_t begin, int64_t count) {
  const Tensor& A = val(a);
  if (begin < 0 || count < 0 || begin + count > A.cols()) {
    raise(ErrorCode::IndexOutOfRange, "slice_cols out of range");
  }
  Tensor C(A.rows(), count);
  for (int64_t i = 0; i < A.rows(); ++i) {
    for (int64_t j = 0; j < count; ++j) C.at(i, j) = A.at(i, begin + j);
  }
  bool wg = wants(a);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, begin, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      Tensor& gp = g.grad_buf(a);
      for (int64_t i = 0; i < dC.rows(); ++i) {
        for (int64_t j = 0; j < dC.cols(); ++j) gp.at(i, begin + j) += dC.at(i, j);
      }
    };
  }
  return self;
}

Graph::Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) raise(ErrorCode::InvalidArgument, "concat_cols of nothing");
  int64_t rows = val(parts[0]).rows();
  int64_t cols = 0;
  bool wg = false;
  for (Var p : parts) {
    if (val(p).rows() != rows) raise(ErrorCode::ShapeMismatch, "concat_cols row mismatch");
    cols += val(p).cols();
    wg = wg || wants(p);
  }
  Tensor C(rows, cols);
  int64_t off = 0;
  for (Var p : parts) {
    const Tensor& P = val(p);
    for (int64_t i = 0; i < rows; ++i) {
      for (int64_t j = 0; j < P.cols(); ++j) C.at(i, off + j) = P.at(i, j);
    }
    off += P.cols();
  }
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    auto parts_copy = parts;
    nodes_.back().back = [parts_copy, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      int64_t off = 0;
      for (Var p : parts_copy) {
        int64_t pc = g.val(p).cols();
        if (g.wants(p)) {
          Tensor& gp = g.grad_buf(p);
          for (int64_t i = 0; i < dC.rows(); ++i) {
            for (int64_t j = 0; j < pc; ++j) gp.at(i, j) += dC.at(i, off + j);
          }
        }
        off += pc;
      }
    };
  }
  return self;
}

Graph::Var Graph::stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) raise(ErrorCode::InvalidArgument, "stack_rows of nothing");
  int64_t d = val(rows[0]).cols();
  bool wg = false;
  for (Var r : rows) {
    const Tensor& R = val(r);
    if (R.rows() != 1 || R.cols() != d) raise(ErrorCode::ShapeMismatch, "stack_rows expects [1,d] rows");
    wg = wg || wants(r);
  }
  Tensor C(static_cast<int64_t>(rows.size()), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    const Tensor& R = val(rows[i]);
    for (int64_t j = 0; j < d; ++j) C.at(static_cast<int64_t>(i), j) = R[j];
  }
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    auto rows_copy = rows;
    nodes_.back().back = [rows_copy, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      for (size_t i = 0; i < rows_copy.size(); ++i) {
        if (!g.wants(rows_copy[i])) continue;
        Tensor& gp = g.grad_buf(rows_copy[i]);
        for (int64_t j = 0; j < dC.cols(); ++j) gp[j] += dC.at(static_cast<int64_t>(i), j);
      }
    };
  }
  return self;
}

Graph::Var Graph::pick_row(Var a, int64_t row) {
  const Tensor& A = val(a);
  if (row < 0 || row >= A.rows()) raise(ErrorCode::IndexOutOfRange, "pick_row out of range");
  Tensor C(1, A.cols());
  for (int64_t j = 0; j < A.cols(); ++j) C[j] = A.at(row, j);
  bool wg = wants(a);
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    nodes_.back().back = [a, row, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      Tensor& gp = g.grad_buf(a);
      for (int64_t j = 0; j < dC.cols(); ++j) gp.at(row, j) += dC[j];
    };
  }
  return self;
}

Graph::Var Graph::average(const std::vector<Var>& vars) {
  if (vars.empty()) raise(ErrorCode::InvalidArgument, "average of nothing");
  Tensor C = val(vars[0]);
  bool wg = wants(vars[0]);
  for (size_t i = 1; i < vars.size(); ++i) {
    const Tensor& V = val(vars[i]);
    if (!V.same_shape(C)) raise(ErrorCode::ShapeMismatch, "average shape mismatch");
    const double* vd = V.data();
    double* cd = C.data();
    for (int64_t j = 0; j < C.size(); ++j) cd[j] += vd[j];
    wg = wg || wants(vars[i]);
  }
  double inv = 1.0 / static_cast<double>(vars.size());
  double* cd = C.data();
  for (int64_t j = 0; j < C.size(); ++j) cd[j] *= inv;
  Var self = push(std::move(C), wg, nullptr);
  if (wg) {
    auto vars_copy = vars;
    nodes_.back().back = [vars_copy, inv, self](Graph& g) {
      const Tensor& dC = g.nodes_[self].grad;
      for (Var v : vars_copy) {
        if (!g.wants(v)) continue;
        double* gp = g.grad_buf(v).data();
        const double* d = dC.data();
        for (int64_t j = 0; j < dC.size(); ++j) gp[j] += inv * d[j];
      }
    };
  }
  return self;
}

Graph::Var Graph::cross_entropy_logits(Var logits, int label) {
  const Tensor& L = val(logits);
  if (L.rows() != 1) raise(ErrorCode::ShapeMismatch, "cross entropy expects [1,k] logits");
  int64_t k = L.cols();
  if (label < 0 || label >= k) raise(ErrorCode::IndexOutOfRange, "label out of range");
  double mx = L[0];
  for (int64_t j = 1; j < k; ++j) mx = std::max(mx, L[j]);
  double sum = 0.0;
  auto probs = std::make_shared<std::vector<double>>(static_cast<size_t>(k));
  for (int64_t j = 0; j < k; ++j) {
    double e = std::exp(L[j] - mx);
    (*probs)[static_cast<size_t>(j)] = e;
    sum += e;
  }
  for (double& p : *probs) p /= sum;
  double loss = std::log(sum) + mx - L[label];
  Tensor out(1, 1);
  out[0] = loss;
  bool wg = wants(logits);
  Var self = push(std::move(out), wg, nullptr);
  if (wg) {
    nodes_.back().back = [logits, label, probs, self](Graph& g) {
      double seed = g.nodes_[self].grad[0];
      Tensor& gp = g.grad_buf(logits);
      for (size_t j = 0; j < probs->size(); ++j) {
        double onehot = (static_cast<int>(j) == label) ? 1.0 : 0.0;
        gp[static_cast<int64_t>(j)] += seed * ((*probs)[j] - onehot);
      }
    };
  }
  return self;
}

Graph::Var Graph::bce_explanation(Var attention, std::vector<double> targets) {
  const Tensor& W = val(attention);
  if (W.rows() != 1) raise(ErrorCode::ShapeMismatch, "bce expects [1,n] attention");
  int64_t n = W.cols();
  if (static_cast<int64_t>(targets.size()) != n) {
    raise(ErrorCode::ShapeMismatch, "bce targets length mismatch");
  }
  auto ps = std::make_shared<std::vector<double>>(static_cast<size_t>(n));
  double loss = 0.0;
  for (int64_t j = 0; j < n; ++j) {
    double p = 1.0 - std::exp(-W[j]);
    (*ps)[static_cast<size_t>(j)] = p;
    double pc = std::min(kBceClampHi, std::max(kBceClampLo, p));
    double t = targets[static_cast<size_t>(j)];
    loss -= t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc);
  }
  loss /= static_cast<double>(n);
  Tensor out(1, 1);
  out[0] = loss;
  bool wg = wants(attention);
  Var self = push(std::move(out), wg, nullptr);
  if (wg) {
    auto tgt = std::make_shared<std::vector<double>>(std::move(targets));
    nodes_.back().back = [attention, ps, tgt, self, n](Graph& g) {
      double seed = g.nodes_[self].grad[0];
      Tensor& gw = g.grad_buf(attention);
      for (int64_t j = 0; j < n; ++j) {
        double p = (*ps)[static_cast<size_t>(j)];
        if (p <= kBceClampLo || p >= kBceClampHi) continue;  // clamped: flat
        double t = (*tgt)[static_cast<size_t>(j)];
        // dL/dp = (p-t)/(p(1-p))/n, dp/dw = 1-p
        gw[j] += seed * (p - t) / (p * static_cast<double>(n));
      }
    };
  }
  return self;
}

}  // namespace taaco
