#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "couta/tensor.hpp"

namespace couta::ad {

// Handle into a Graph's tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense tensors. Ops are recorded in construction
// order, which is a topological order; backward replays it in reverse.
class Graph {
public:
    Var leaf(const Tensor& t) { return push(t, {}, nullptr); }

    const Tensor& value(Var v) const { return node(v).value; }
    const std::vector<double>& grad(Var v) const { return node(v).grad; }

    void zero_grad() {
        for (auto& n : nodes_)
            std::fill(n.grad.begin(), n.grad.end(), 0.0);
    }

    // Accumulates d(loss)/d(node) into every node's grad slot. Each call
    // computes a fresh adjoint pass, so calling twice doubles the grads.
    void backward(Var loss) {
        Node& l = node(loss);
        if (l.value.numel() != 1)
            throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                        shape_str(l.value.shape));
        std::vector<std::vector<double>> prior;
        prior.reserve(nodes_.size());
        for (auto& n : nodes_) {
            prior.push_back(std::move(n.grad));
            n.grad.assign(prior.back().size(), 0.0);
        }
        l.grad[0] = 1.0;
        for (int i = loss.id; i >= 0; --i) {
            Node& n = nodes_[static_cast<std::size_t>(i)];
            if (n.backward) n.backward(*this, n);
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            for (std::size_t j = 0; j < prior[i].size(); ++j) nodes_[i].grad[j] += prior[i][j];
    }

    std::size_t size() const { return nodes_.size(); }

    // ---- primitives ----

    Var add(Var a, Var b) {
        check_same("add", a, b);
        Tensor out = value(a);
        const Tensor& vb = value(b);
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] += vb[i];
        return push(std::move(out), {a.id, b.id}, [](Graph& g, Node& n) {
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                g.nodes_[n.inputs[0]].grad[i] += n.grad[i];
                g.nodes_[n.inputs[1]].grad[i] += n.grad[i];
            }
        });
    }

    Var sub(Var a, Var b) {
        check_same("sub", a, b);
        Tensor out = value(a);
        const Tensor& vb = value(b);
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= vb[i];
        return push(std::move(out), {a.id, b.id}, [](Graph& g, Node& n) {
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                g.nodes_[n.inputs[0]].grad[i] += n.grad[i];
                g.nodes_[n.inputs[1]].grad[i] -= n.grad[i];
            }
        });
    }

    Var mul(Var a, Var b) {
        check_same("mul", a, b);
        Tensor out = value(a);
        const Tensor& vb = value(b);
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= vb[i];
        return push(std::move(out), {a.id, b.id}, [](Graph& g, Node& n) {
            Node& na = g.nodes_[n.inputs[0]];
            Node& nb = g.nodes_[n.inputs[1]];
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                na.grad[i] += n.grad[i] * nb.value[i];
                nb.grad[i] += n.grad[i] * na.value[i];
            }
        });
    }

    Var scale(Var a, double k) {
        Tensor out = value(a);
        for (auto& v : out.values) v *= k;
        return push(std::move(out), {a.id}, [k](Graph& g, Node& n) {
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                g.nodes_[n.inputs[0]].grad[i] += k * n.grad[i];
        });
    }

    Var add_const(Var a, double k) {
        Tensor out = value(a);
        for (auto& v : out.values) v += k;
        return push(std::move(out), {a.id}, [](Graph& g, Node& n) {
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                g.nodes_[n.inputs[0]].grad[i] += n.grad[i];
        });
    }

    Var exp_(Var a) {
        Tensor out = value(a);
        for (auto& v : out.values) v = std::exp(v);
        return push(std::move(out), {a.id}, [](Graph& g, Node& n) {
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                g.nodes_[n.inputs[0]].grad[i] += n.grad[i] * n.value[i];
        });
    }

    Var square(Var a) {
        Tensor out = value(a);
        for (auto& v : out.values) v *= v;
        return push(std::move(out), {a.id}, [](Graph& g, Node& n) {
            Node& na = g.nodes_[n.inputs[0]];
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                na.grad[i] += 2.0 * na.value[i] * n.grad[i];
        });
    }

    Var leaky_relu(Var a, double slope) {
        Tensor out = value(a);
        for (auto& v : out.values)
            if (v < 0.0) v *= slope;
        return push(std::move(out), {a.id}, [slope](Graph& g, Node& n) {
            Node& na = g.nodes_[n.inputs[0]];
            for (std::size_t i = 0; i < n.grad.size(); ++i)
                na.grad[i] += n.grad[i] * (na.value[i] >= 0.0 ? 1.0 : slope);
        });
    }

    Var relu(Var a) { return leaky_relu(a, 0.0); }

    Var sum(Var a) {
        double s = 0.0;
        for (double v : value(a).values) s += v;
        return push(Tensor::scalar(s), {a.id}, [](Graph& g, Node& n) {
            Node& na = g.nodes_[n.inputs[0]];
            for (auto& gi : na.grad) gi += n.grad[0];
        });
    }

    Var mean(Var a) {
        const std::size_t m = value(a).numel();
        if (m == 0) throw std::invalid_argument("mean: empty tensor");
        double s = 0.0;
        for (double v : value(a).values) s += v;
        return push(Tensor::scalar(s / static_cast<double>(m)), {a.id},
                    [m](Graph& g, Node& n) {
                        Node& na = g.nodes_[n.inputs[0]];
                        const double k = n.grad[0] / static_cast<double>(m);
                        for (auto& gi : na.grad) gi += k;
                    });
    }

    // x: [B, Fin], w: [Fin, Fout], b: [Fout] -> [B, Fout]
    Var affine(Var x, Var w, Var b) {
        const Tensor& vx = value(x);
        const Tensor& vw = value(w);
        const Tensor& vb = value(b);
        if (vx.shape.size() != 2 || vw.shape.size() != 2 || vb.shape.size() != 1 ||
            vx.dim(1) != vw.dim(0) || vw.dim(1) != vb.dim(0))
            throw std::invalid_argument("affine: incompatible shapes x" +
                                        shape_str(vx.shape) + " w" + shape_str(vw.shape) +
                                        " b" + shape_str(vb.shape));
        const std::size_t B = vx.dim(0), Fi = vx.dim(1), Fo = vw.dim(1);
        Tensor out({B, Fo});
        for (std::size_t r = 0; r < B; ++r)
            for (std::size_t o = 0; o < Fo; ++o) {
                double acc = vb[o];
                for (std::size_t i = 0; i < Fi; ++i)
                    acc += vx[r * Fi + i] * vw[i * Fo + o];
                out[r * Fo + o] = acc;
            }
        return push(std::move(out), {x.id, w.id, b.id},
                    [B, Fi, Fo](Graph& g, Node& n) {
                        Node& nx = g.nodes_[n.inputs[0]];
                        Node& nw = g.nodes_[n.inputs[1]];
                        Node& nb = g.nodes_[n.inputs[2]];
                        for (std::size_t r = 0; r < B; ++r)
                            for (std::size_t o = 0; o < Fo; ++o) {
                                const double go = n.grad[r * Fo + o];
                                if (go == 0.0) continue;
                                nb.grad[o] += go;
                                for (std::size_t i = 0; i < Fi; ++i) {
                                    nx.grad[r * Fi + i] += go * nw.value[i * Fo + o];
                                    nw.grad[i * Fo + o] += go * nx.value[r * Fi + i];
                                }
                            }
                    });
    }

    // Dilated causal 1-D convolution with left zero padding.
    // x: [B, T, Cin], w: [Cout, Cin, K], b: [Cout] -> [B, T, Cout].
    // Tap k of the kernel reads x at t - (K-1-k)*dilation, so the output at
    // time t never sees inputs later than t.
    Var conv1d_causal(Var x, Var w, Var b, std::size_t dilation) {
        const Tensor& vx = value(x);
        const Tensor& vw = value(w);
        const Tensor& vb = value(b);
        if (dilation < 1)
            throw std::invalid_argument("conv1d_causal: dilation must be >= 1");
        if (vx.shape.size() != 3 || vw.shape.size() != 3 || vb.shape.size() != 1 ||
            vx.dim(2) != vw.dim(1) || vw.dim(0) != vb.dim(0))
            throw std::invalid_argument("conv1d_causal: incompatible shapes x" +
                                        shape_str(vx.shape) + " w" + shape_str(vw.shape) +
                                        " b" + shape_str(vb.shape));
        const std::size_t B = vx.dim(0), T = vx.dim(1), Ci = vx.dim(2);
        const std::size_t Co = vw.dim(0), K = vw.dim(2);
        Tensor out({B, T, Co});
        for (std::size_t bi = 0; bi < B; ++bi)
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t co = 0; co < Co; ++co) {
                    double acc = vb[co];
                    for (std::size_t k = 0; k < K; ++k) {
                        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) -
                            static_cast<std::ptrdiff_t>((K - 1 - k) * dilation);
                        if (src < 0) continue;
                        for (std::size_t ci = 0; ci < Ci; ++ci)
                            acc += vw[(co * Ci + ci) * K + k] *
                                   vx[(bi * T + static_cast<std::size_t>(src)) * Ci + ci];
                    }
                    out[(bi * T + t) * Co + co] = acc;
                }
        return push(std::move(out), {x.id, w.id, b.id},
                    [B, T, Ci, Co, K, dilation](Graph& g, Node& n) {
                        Node& nx = g.nodes_[n.inputs[0]];
                        Node& nw = g.nodes_[n.inputs[1]];
                        Node& nb = g.nodes_[n.inputs[2]];
                        for (std::size_t bi = 0; bi < B; ++bi)
                            for (std::size_t t = 0; t < T; ++t)
                                for (std::size_t co = 0; co < Co; ++co) {
                                    const double go = n.grad[(bi * T + t) * Co + co];
                                    if (go == 0.0) continue;
                                    nb.grad[co] += go;
                                    for (std::size_t k = 0; k < K; ++k) {
                                        const std::ptrdiff_t src =
                                            static_cast<std::ptrdiff_t>(t) -
                                            static_cast<std::ptrdiff_t>((K - 1 - k) * dilation);
                                        if (src < 0) continue;
                                        const std::size_t xoff =
                                            (bi * T + static_cast<std::size_t>(src)) * Ci;
                                        for (std::size_t ci = 0; ci < Ci; ++ci) {
                                            nx.grad[xoff + ci] += go * nw.value[(co * Ci + ci) * K + k];
                                            nw.grad[(co * Ci + ci) * K + k] += go * nx.value[xoff + ci];
                                        }
                                    }
                                }
                    });
    }

    // [B, T, C] -> [B, C], the representation at the final timestep.
    Var last_timestep(Var x) {
        const Tensor& vx = value(x);
        if (vx.shape.size() != 3)
            throw std::invalid_argument("last_timestep: expected rank-3 input, got " +
                                        shape_str(vx.shape));
        const std::size_t B = vx.dim(0), T = vx.dim(1), C = vx.dim(2);
        Tensor out({B, C});
        for (std::size_t bi = 0; bi < B; ++bi)
            for (std::size_t c = 0; c < C; ++c)
                out[bi * C + c] = vx[(bi * T + T - 1) * C + c];
        return push(std::move(out), {x.id}, [B, T, C](Graph& g, Node& n) {
            Node& nx = g.nodes_[n.inputs[0]];
            for (std::size_t bi = 0; bi < B; ++bi)
                for (std::size_t c = 0; c < C; ++c)
                    nx.grad[(bi * T + T - 1) * C + c] += n.grad[bi * C + c];
        });
    }

    // x: [B, H], c fixed: [H] -> [B], per-row squared Euclidean distance to c.
    Var sqdist_to(Var x, const Tensor& c) {
        const Tensor& vx = value(x);
        if (vx.shape.size() != 2 || c.shape.size() != 1 || vx.dim(1) != c.dim(0))
            throw std::invalid_argument("sqdist_to: incompatible shapes x" +
                                        shape_str(vx.shape) + " c" + shape_str(c.shape));
        const std::size_t B = vx.dim(0), H = vx.dim(1);
        Tensor out({B});
        for (std::size_t bi = 0; bi < B; ++bi) {
            double acc = 0.0;
            for (std::size_t h = 0; h < H; ++h) {
                const double dv = vx[bi * H + h] - c[h];
                acc += dv * dv;
            }
            out[bi] = acc;
        }
        Tensor cc = c;
        return push(std::move(out), {x.id}, [B, H, cc](Graph& g, Node& n) {
            Node& nx = g.nodes_[n.inputs[0]];
            for (std::size_t bi = 0; bi < B; ++bi) {
                const double go = n.grad[bi];
                if (go == 0.0) continue;
                for (std::size_t h = 0; h < H; ++h)
                    nx.grad[bi * H + h] += 2.0 * (nx.value[bi * H + h] - cc[h]) * go;
            }
        });
    }

    // x: [B, H], c fixed: [H] -> [B], per-row Euclidean norm of x - c.
    Var norm_to(Var x, const Tensor& c) {
        const Tensor& vx = value(x);
        if (vx.shape.size() != 2 || c.shape.size() != 1 || vx.dim(1) != c.dim(0))
            throw std::invalid_argument("norm_to: incompatible shapes x" +
                                        shape_str(vx.shape) + " c" + shape_str(c.shape));
        const std::size_t B = vx.dim(0), H = vx.dim(1);
        Tensor out({B});
        for (std::size_t bi = 0; bi < B; ++bi) {
            double acc = 0.0;
            for (std::size_t h = 0; h < H; ++h) {
                const double dv = vx[bi * H + h] - c[h];
                acc += dv * dv;
            }
            out[bi] = std::sqrt(acc);
        }
        Tensor cc = c;
        return push(std::move(out), {x.id}, [B, H, cc](Graph& g, Node& n) {
            Node& nx = g.nodes_[n.inputs[0]];
            for (std::size_t bi = 0; bi < B; ++bi) {
                const double go = n.grad[bi];
                if (go == 0.0 || n.value[bi] == 0.0) continue;
                const double inv = go / n.value[bi];
                for (std::size_t h = 0; h < H; ++h)
                    nx.grad[bi * H + h] += (nx.value[bi * H + h] - cc[h]) * inv;
            }
        });
    }

private:
    struct Node {
        Tensor value;
        std::vector<double> grad;
        std::vector<int> inputs;
        std::function<void(Graph&, Node&)> backward;
    };

    Var push(Tensor value, std::vector<int> inputs,
             std::function<void(Graph&, Node&)> bwd) {
        Node n;
        n.grad.assign(value.numel(), 0.0);
        n.value = std::move(value);
        n.inputs = std::move(inputs);
        n.backward = std::move(bwd);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    Node& node(Var v) {
        if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
            throw std::invalid_argument("Graph: invalid Var handle");
        return nodes_[static_cast<std::size_t>(v.id)];
    }
    const Node& node(Var v) const {
        if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
            throw std::invalid_argument("Graph: invalid Var handle");
        return nodes_[static_cast<std::size_t>(v.id)];
    }

    void check_same(const char* op, Var a, Var b) const {
        if (!value(a).same_shape(value(b)))
            throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                        shape_str(value(a).shape) + " vs " +
                                        shape_str(value(b).shape));
    }

    std::vector<Node> nodes_;
};

}  // namespace couta::ad
