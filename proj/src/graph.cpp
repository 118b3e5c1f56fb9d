#include "slac/graph.hpp"

#include <algorithm>
#include <cmath>

namespace slac {

void Graph::check_finite(const Tensor& t, const char* op) {
    for (double v : t.data) {
        if (!std::isfinite(v))
            throw EngineError(std::string("non-finite value produced by ") + op);
    }
}

Graph::Id Graph::push(Tensor value, bool requires_grad, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

void Graph::ensure_grad(Id id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
}

Graph::Id Graph::leaf(Tensor value, bool requires_grad) {
    check_finite(value, "leaf");
    return push(std::move(value), requires_grad, nullptr);
}

Graph::Id Graph::matmul(Id a, Id b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    if (A.cols() != B.rows())
        throw EngineError("matmul shape mismatch " + A.shape_str() + " x " + B.shape_str());
    std::size_t r = A.rows(), k = A.cols(), c = B.cols();
    Tensor out = Tensor::zeros({r, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            double av = A.at(i, l);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) out.at(i, j) += av * B.at(l, j);
        }
    check_finite(out, "matmul");
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, b, id] {
            const Tensor& g = nodes_[id].grad;
            const Tensor& A2 = nodes_[a].value;
            const Tensor& B2 = nodes_[b].value;
            std::size_t r2 = A2.rows(), k2 = A2.cols(), c2 = B2.cols();
            if (nodes_[a].requires_grad) {
                ensure_grad(a);
                Tensor& ga = nodes_[a].grad;
                for (std::size_t i = 0; i < r2; ++i)
                    for (std::size_t j = 0; j < c2; ++j) {
                        double gv = g.at(i, j);
                        if (gv == 0.0) continue;
                        for (std::size_t l = 0; l < k2; ++l)
                            ga.at(i, l) += gv * B2.at(l, j);
                    }
            }
            if (nodes_[b].requires_grad) {
                ensure_grad(b);
                Tensor& gb = nodes_[b].grad;
                for (std::size_t i = 0; i < r2; ++i)
                    for (std::size_t l = 0; l < k2; ++l) {
                        double av = A2.at(i, l);
                        if (av == 0.0) continue;
                        for (std::size_t j = 0; j < c2; ++j)
                            gb.at(l, j) += av * g.at(i, j);
                    }
            }
        };
    }
    return id;
}

Graph::Id Graph::matmul_nt(Id a, Id b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    if (A.cols() != B.cols())
        throw EngineError("matmul_nt shape mismatch " + A.shape_str() + " x " + B.shape_str() + "^T");
    std::size_t r = A.rows(), k = A.cols(), c = B.rows();
    Tensor out = Tensor::zeros({r, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += A.at(i, l) * B.at(j, l);
            out.at(i, j) = s;
        }
    check_finite(out, "matmul_nt");
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, b, id] {
            const Tensor& g = nodes_[id].grad;
            const Tensor& A2 = nodes_[a].value;
            const Tensor& B2 = nodes_[b].value;
            std::size_t r2 = A2.rows(), k2 = A2.cols(), c2 = B2.rows();
            if (nodes_[a].requires_grad) {
                ensure_grad(a);
                Tensor& ga = nodes_[a].grad;
                for (std::size_t i = 0; i < r2; ++i)
                    for (std::size_t j = 0; j < c2; ++j) {
                        double gv = g.at(i, j);
                        if (gv == 0.0) continue;
                        for (std::size_t l = 0; l < k2; ++l)
                            ga.at(i, l) += gv * B2.at(j, l);
                    }
            }
            if (nodes_[b].requires_grad) {
                ensure_grad(b);
                Tensor& gb = nodes_[b].grad;
                for (std::size_t i = 0; i < r2; ++i)
                    for (std::size_t j = 0; j < c2; ++j) {
                        double gv = g.at(i, j);
                        if (gv == 0.0) continue;
                        for (std::size_t l = 0; l < k2; ++l)
                            gb.at(j, l) += gv * A2.at(i, l);
                    }
            }
        };
    }
    return id;
}

Graph::Id Graph::add(Id a, Id b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    if (!A.same_shape(B))
        throw EngineError("add shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
    check_finite(out, "add");
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, b, id] {
            const Tensor& g = nodes_[id].grad;
            for (Id p : {a, b}) {
                if (!nodes_[p].requires_grad) continue;
                ensure_grad(p);
                Tensor& gp = nodes_[p].grad;
                for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i];
            }
        };
    }
    return id;
}

Graph::Id Graph::add_row(Id a, Id row) {
    const Tensor& A = nodes_[a].value;
    const Tensor& R = nodes_[row].value;
    if (R.rows() != 1 || R.cols() != A.cols())
        throw EngineError("add_row shape mismatch " + A.shape_str() + " + " + R.shape_str());
    Tensor out = A;
    std::size_t r = A.rows(), c = A.cols();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) += R.data[j];
    check_finite(out, "add_row");
    bool rg = nodes_[a].requires_grad || nodes_[row].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, row, id] {
            const Tensor& g = nodes_[id].grad;
            std::size_t r2 = g.rows(), c2 = g.cols();
            if (nodes_[a].requires_grad) {
                ensure_grad(a);
                Tensor& ga = nodes_[a].grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
            }
            if (nodes_[row].requires_grad) {
                ensure_grad(row);
                Tensor& gr = nodes_[row].grad;
                for (std::size_t i = 0; i < r2; ++i)
                    for (std::size_t j = 0; j < c2; ++j) gr.data[j] += g.at(i, j);
            }
        };
    }
    return id;
}

Graph::Id Graph::sub(Id a, Id b) {
    Id nb = scale(b, -1.0);
    return add(a, nb);
}

Graph::Id Graph::mul(Id a, Id b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    if (!A.same_shape(B))
        throw EngineError("mul shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= B.data[i];
    check_finite(out, "mul");
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, b, id] {
            const Tensor& g = nodes_[id].grad;
            if (nodes_[a].requires_grad) {
                ensure_grad(a);
                Tensor& ga = nodes_[a].grad;
                const Tensor& B2 = nodes_[b].value;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * B2.data[i];
            }
            if (nodes_[b].requires_grad) {
                ensure_grad(b);
                Tensor& gb = nodes_[b].grad;
                const Tensor& A2 = nodes_[a].value;
                for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * A2.data[i];
            }
        };
    }
    return id;
}

Graph::Id Graph::scale(Id a, double c) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v *= c;
    check_finite(out, "scale");
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, c, id] {
            ensure_grad(a);
            const Tensor& g = nodes_[id].grad;
            Tensor& ga = nodes_[a].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
        };
    }
    return id;
}

Graph::Id Graph::tanh_(Id a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = std::tanh(v);
    check_finite(out, "tanh");
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, id] {
            ensure_grad(a);
            const Tensor& g = nodes_[id].grad;
            const Tensor& y = nodes_[id].value;
            Tensor& ga = nodes_[a].grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
        };
    }
    return id;
}

Graph::Id Graph::log_(Id a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = std::log(v);
    check_finite(out, "log");
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, id] {
            ensure_grad(a);
            const Tensor& g = nodes_[id].grad;
            const Tensor& x = nodes_[a].value;
            Tensor& ga = nodes_[a].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] / x.data[i];
        };
    }
    return id;
}

Graph::Id Graph::softmax_rows(Id a) {
    const Tensor& A = nodes_[a].value;
    Tensor out = A;
    std::size_t r = A.rows(), c = A.cols();
    for (std::size_t i = 0; i < r; ++i) {
        double mx = out.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, out.at(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            double e = std::exp(out.at(i, j) - mx);
            out.at(i, j) = e;
            z += e;
        }
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= z;
    }
    check_finite(out, "softmax");
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, id] {
            ensure_grad(a);
            const Tensor& g = nodes_[id].grad;
            const Tensor& s = nodes_[id].value;
            Tensor& ga = nodes_[a].grad;
            std::size_t r2 = s.rows(), c2 = s.cols();
            for (std::size_t i = 0; i < r2; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < c2; ++j) dot += g.at(i, j) * s.at(i, j);
                for (std::size_t j = 0; j < c2; ++j)
                    ga.at(i, j) += s.at(i, j) * (g.at(i, j) - dot);
            }
        };
    }
    return id;
}

Graph::Id Graph::layer_norm(Id x, Id gamma, Id beta, double eps) {
    const Tensor& X = nodes_[x].value;
    const Tensor& G = nodes_[gamma].value;
    const Tensor& B = nodes_[beta].value;
    std::size_t r = X.rows(), c = X.cols();
    if (G.cols() != c || B.cols() != c || G.rows() != 1 || B.rows() != 1)
        throw EngineError("layer_norm scale/offset shape mismatch");
    Tensor out = Tensor::zeros({r, c});
    std::vector<double> xhat(r * c), inv_std(r);
    for (std::size_t i = 0; i < r; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < c; ++j) mu += X.at(i, j);
        mu /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            double d = X.at(i, j) - mu;
            var += d * d;
        }
        var /= static_cast<double>(c);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[i] = is;
        for (std::size_t j = 0; j < c; ++j) {
            double xh = (X.at(i, j) - mu) * is;
            xhat[i * c + j] = xh;
            out.at(i, j) = G.data[j] * xh + B.data[j];
        }
    }
    check_finite(out, "layer_norm");
    bool rg = nodes_[x].requires_grad || nodes_[gamma].requires_grad ||
              nodes_[beta].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, x, gamma, beta, id, xhat = std::move(xhat),
                           inv_std = std::move(inv_std)] {
            const Tensor& g = nodes_[id].grad;
            const Tensor& G2 = nodes_[gamma].value;
            std::size_t r2 = g.rows(), c2 = g.cols();
            if (nodes_[gamma].requires_grad) {
                ensure_grad(gamma);
                Tensor& gg = nodes_[gamma].grad;
                for (std::size_t i = 0; i < r2; ++i)
                    for (std::size_t j = 0; j < c2; ++j)
                        gg.data[j] += g.at(i, j) * xhat[i * c2 + j];
            }
            if (nodes_[beta].requires_grad) {
                ensure_grad(beta);
                Tensor& gb = nodes_[beta].grad;
                for (std::size_t i = 0; i < r2; ++i)
                    for (std::size_t j = 0; j < c2; ++j) gb.data[j] += g.at(i, j);
            }
            if (nodes_[x].requires_grad) {
                ensure_grad(x);
                Tensor& gx = nodes_[x].grad;
                for (std::size_t i = 0; i < r2; ++i) {
                    double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                    for (std::size_t j = 0; j < c2; ++j) {
                        double dxh = g.at(i, j) * G2.data[j];
                        mean_dxh += dxh;
                        mean_dxh_xh += dxh * xhat[i * c2 + j];
                    }
                    mean_dxh /= static_cast<double>(c2);
                    mean_dxh_xh /= static_cast<double>(c2);
                    for (std::size_t j = 0; j < c2; ++j) {
                        double dxh = g.at(i, j) * G2.data[j];
                        gx.at(i, j) += inv_std[i] *
                            (dxh - mean_dxh - xhat[i * c2 + j] * mean_dxh_xh);
                    }
                }
            }
        };
    }
    return id;
}

Graph::Id Graph::dropout(Id a, double p, Mode mode, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw EngineError("dropout probability must be in [0, 1)");
    if (mode == Mode::Eval || p == 0.0) return a;
    const Tensor& A = nodes_[a].value;
    std::vector<double> mask(A.size());
    double keep = 1.0 - p;
    for (double& m : mask) m = (rng.uniform() < p) ? 0.0 : 1.0 / keep;
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask[i];
    check_finite(out, "dropout");
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, id, mask = std::move(mask)] {
            ensure_grad(a);
            const Tensor& g = nodes_[id].grad;
            Tensor& ga = nodes_[a].grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * mask[i];
        };
    }
    return id;
}

Graph::Id Graph::concat_cols(const std::vector<Id>& parts) {
    if (parts.empty()) throw EngineError("concat_cols of nothing");
    std::size_t r = nodes_[parts[0]].value.rows();
    std::size_t c = 0;
    bool rg = false;
    for (Id p : parts) {
        if (nodes_[p].value.rows() != r) throw EngineError("concat_cols row mismatch");
        c += nodes_[p].value.cols();
        rg = rg || nodes_[p].requires_grad;
    }
    Tensor out = Tensor::zeros({r, c});
    std::size_t off = 0;
    for (Id p : parts) {
        const Tensor& P = nodes_[p].value;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < P.cols(); ++j) out.at(i, off + j) = P.at(i, j);
        off += P.cols();
    }
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, parts, id] {
            const Tensor& g = nodes_[id].grad;
            std::size_t r2 = g.rows();
            std::size_t off2 = 0;
            for (Id p : parts) {
                std::size_t pc = nodes_[p].value.cols();
                if (nodes_[p].requires_grad) {
                    ensure_grad(p);
                    Tensor& gp = nodes_[p].grad;
                    for (std::size_t i = 0; i < r2; ++i)
                        for (std::size_t j = 0; j < pc; ++j)
                            gp.at(i, j) += g.at(i, off2 + j);
                }
                off2 += pc;
            }
        };
    }
    return id;
}

Graph::Id Graph::slice_cols(Id a, std::size_t start, std::size_t len) {
    const Tensor& A = nodes_[a].value;
    if (start + len > A.cols()) throw EngineError("slice_cols out of range");
    std::size_t r = A.rows();
    Tensor out = Tensor::zeros({r, len});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < len; ++j) out.at(i, j) = A.at(i, start + j);
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, start, len, id] {
            ensure_grad(a);
            const Tensor& g = nodes_[id].grad;
            Tensor& ga = nodes_[a].grad;
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < len; ++j)
                    ga.at(i, start + j) += g.at(i, j);
        };
    }
    return id;
}

Graph::Id Graph::transpose(Id a) {
    const Tensor& A = nodes_[a].value;
    std::size_t r = A.rows(), c = A.cols();
    Tensor out = Tensor::zeros({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(j, i) = A.at(i, j);
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, id] {
            ensure_grad(a);
            const Tensor& g = nodes_[id].grad;
            Tensor& ga = nodes_[a].grad;
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) ga.at(j, i) += g.at(i, j);
        };
    }
    return id;
}

Graph::Id Graph::gather_rows(Id table, std::vector<std::size_t> indices) {
    const Tensor& T = nodes_[table].value;
    std::size_t c = T.cols();
    Tensor out = Tensor::zeros({indices.size(), c});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= T.rows()) throw EngineError("gather_rows index out of range");
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = T.at(indices[i], j);
    }
    bool rg = nodes_[table].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, table, id, indices = std::move(indices)] {
            ensure_grad(table);
            const Tensor& g = nodes_[id].grad;
            Tensor& gt = nodes_[table].grad;
            for (std::size_t i = 0; i < indices.size(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j)
                    gt.at(indices[i], j) += g.at(i, j);
        };
    }
    return id;
}

Graph::Id Graph::sum(Id a) {
    const Tensor& A = nodes_[a].value;
    double s = 0.0;
    for (double v : A.data) s += v;
    Tensor out = Tensor::scalar(s);
    check_finite(out, "sum");
    bool rg = nodes_[a].requires_grad;
    Id id = push(std::move(out), rg, nullptr);
    if (rg) {
        nodes_[id].back = [this, a, id] {
            ensure_grad(a);
            double g = nodes_[id].grad.data[0];
            Tensor& ga = nodes_[a].grad;
            for (double& v : ga.data) v += g;
        };
    }
    return id;
}

void Graph::backward(Id loss) {
    if (nodes_[loss].value.size() != 1)
        throw EngineError("backward requires a scalar loss node");
    ensure_grad(loss);
    nodes_[loss].grad.data[0] += 1.0;
    for (Id id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.back && !n.grad.data.empty()) n.back();
    }
}

}  // namespace slac
