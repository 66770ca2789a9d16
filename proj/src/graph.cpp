#include "creepuq/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace creepuq {

Graph::NodeId Graph::push(Node n) {
    n.grad = Tensor(n.val.shape);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

Graph::NodeId Graph::input(std::vector<std::size_t> shape) {
    Node n;
    n.op = Op::kInput;
    n.val = Tensor(std::move(shape));
    return push(std::move(n));
}

Graph::NodeId Graph::constant(Tensor value) {
    Node n;
    n.op = Op::kConstant;
    n.val = std::move(value);
    return push(std::move(n));
}

Graph::Broadcast Graph::broadcast_kind(const Tensor& a, const Tensor& b) {
    if (same_shape(a, b)) return Broadcast::kNone;
    if (b.size() == 1) return Broadcast::kScalarB;
    if (a.size() == 1) return Broadcast::kScalarA;
    if (a.rank() == 2 && b.size() == a.cols()) return Broadcast::kRowB;
    throw std::invalid_argument("Graph: incompatible shapes " + shape_string(a) +
                                " and " + shape_string(b));
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
    Broadcast k = broadcast_kind(nodes_[a].val, nodes_[b].val);
    Node n;
    n.op = Op::kAdd;
    n.a = a;
    n.b = b;
    n.val = Tensor(k == Broadcast::kScalarA ? nodes_[b].val.shape : nodes_[a].val.shape);
    return push(std::move(n));
}

Graph::NodeId Graph::sub(NodeId a, NodeId b) {
    Broadcast k = broadcast_kind(nodes_[a].val, nodes_[b].val);
    Node n;
    n.op = Op::kSub;
    n.a = a;
    n.b = b;
    n.val = Tensor(k == Broadcast::kScalarA ? nodes_[b].val.shape : nodes_[a].val.shape);
    return push(std::move(n));
}

Graph::NodeId Graph::mul(NodeId a, NodeId b) {
    Broadcast k = broadcast_kind(nodes_[a].val, nodes_[b].val);
    Node n;
    n.op = Op::kMul;
    n.a = a;
    n.b = b;
    n.val = Tensor(k == Broadcast::kScalarA ? nodes_[b].val.shape : nodes_[a].val.shape);
    return push(std::move(n));
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[b].val;
    if (ta.rank() != 2 || tb.rank() != 2 || ta.cols() != tb.rows())
        throw std::invalid_argument("Graph: matmul shape mismatch " + shape_string(ta) +
                                    " x " + shape_string(tb));
    Node n;
    n.op = Op::kMatMul;
    n.a = a;
    n.b = b;
    n.val = Tensor({ta.rows(), tb.cols()});
    return push(std::move(n));
}

Graph::NodeId Graph::relu(NodeId a) {
    Node n;
    n.op = Op::kRelu;
    n.a = a;
    n.val = Tensor(nodes_[a].val.shape);
    return push(std::move(n));
}

Graph::NodeId Graph::exp(NodeId a) {
    Node n;
    n.op = Op::kExp;
    n.a = a;
    n.val = Tensor(nodes_[a].val.shape);
    return push(std::move(n));
}

Graph::NodeId Graph::log(NodeId a) {
    Node n;
    n.op = Op::kLog;
    n.a = a;
    n.val = Tensor(nodes_[a].val.shape);
    return push(std::move(n));
}

Graph::NodeId Graph::affine(NodeId a, double k0, double k1) {
    Node n;
    n.op = Op::kAffine;
    n.a = a;
    n.k0 = k0;
    n.k1 = k1;
    n.val = Tensor(nodes_[a].val.shape);
    return push(std::move(n));
}

Graph::NodeId Graph::sum(NodeId a) {
    Node n;
    n.op = Op::kSum;
    n.a = a;
    n.val = Tensor({1});
    return push(std::move(n));
}

Graph::NodeId Graph::mean(NodeId a) {
    if (nodes_[a].val.size() == 0)
        throw std::invalid_argument("Graph: mean over empty tensor");
    Node n;
    n.op = Op::kMean;
    n.a = a;
    n.val = Tensor({1});
    return push(std::move(n));
}

Graph::NodeId Graph::slice(NodeId a, std::size_t offset, std::vector<std::size_t> shape) {
    std::size_t need = Tensor::count(shape);
    if (offset + need > nodes_[a].val.size())
        throw std::invalid_argument("Graph: slice out of range");
    Node n;
    n.op = Op::kSlice;
    n.a = a;
    n.offset = offset;
    n.val = Tensor(std::move(shape));
    return push(std::move(n));
}

void Graph::set_values(NodeId id, const std::vector<double>& v) {
    set_values(id, v.data(), v.size());
}

void Graph::set_values(NodeId id, const double* v, std::size_t n) {
    Node& node = nodes_[id];
    if (node.op != Op::kInput && node.op != Op::kConstant)
        throw std::invalid_argument("Graph: set_values on a derived node");
    if (n != node.val.size())
        throw std::invalid_argument("Graph: set_values size mismatch");
    std::copy(v, v + n, node.val.values.begin());
}

double Graph::scalar_value(NodeId id) const {
    const Tensor& t = nodes_[id].val;
    if (t.size() != 1) throw std::invalid_argument("Graph: node is not scalar");
    return t.values[0];
}

void Graph::eval(Node& n) {
    switch (n.op) {
        case Op::kInput:
        case Op::kConstant:
            return;
        case Op::kAdd:
        case Op::kSub:
        case Op::kMul: {
            const Tensor& a = nodes_[n.a].val;
            const Tensor& b = nodes_[n.b].val;
            Tensor& out = n.val;
            Broadcast k = broadcast_kind(a, b);
            std::size_t size = out.size();
            std::size_t cols = out.cols();
            for (std::size_t i = 0; i < size; ++i) {
                double av = (k == Broadcast::kScalarA) ? a.values[0] : a.values[i];
                double bv;
                switch (k) {
                    case Broadcast::kScalarB: bv = b.values[0]; break;
                    case Broadcast::kRowB: bv = b.values[i % cols]; break;
                    case Broadcast::kScalarA: bv = b.values[i]; break;
                    default: bv = b.values[i];
                }
                double r;
                if (n.op == Op::kAdd) r = av + bv;
                else if (n.op == Op::kSub) r = av - bv;
                else r = av * bv;
                out.values[i] = r;
            }
            return;
        }
        case Op::kMatMul: {
            const Tensor& a = nodes_[n.a].val;
            const Tensor& b = nodes_[n.b].val;
            Tensor& out = n.val;
            std::size_t m = a.rows(), kdim = a.cols(), p = b.cols();
            std::fill(out.values.begin(), out.values.end(), 0.0);
            const double* ap = a.values.data();
            const double* bp = b.values.data();
            double* cp = out.values.data();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t k2 = 0; k2 < kdim; ++k2) {
                    double av = ap[i * kdim + k2];
                    if (av == 0.0) continue;
                    const double* brow = bp + k2 * p;
                    double* crow = cp + i * p;
                    for (std::size_t j = 0; j < p; ++j) crow[j] += av * brow[j];
                }
            }
            return;
        }
        case Op::kRelu: {
            const Tensor& a = nodes_[n.a].val;
            for (std::size_t i = 0; i < a.size(); ++i)
                n.val.values[i] = a.values[i] > 0.0 ? a.values[i] : 0.0;
            return;
        }
        case Op::kExp: {
            const Tensor& a = nodes_[n.a].val;
            for (std::size_t i = 0; i < a.size(); ++i) n.val.values[i] = std::exp(a.values[i]);
            return;
        }
        case Op::kLog: {
            const Tensor& a = nodes_[n.a].val;
            for (std::size_t i = 0; i < a.size(); ++i) n.val.values[i] = std::log(a.values[i]);
            return;
        }
        case Op::kAffine: {
            const Tensor& a = nodes_[n.a].val;
            for (std::size_t i = 0; i < a.size(); ++i)
                n.val.values[i] = n.k0 * a.values[i] + n.k1;
            return;
        }
        case Op::kSum: {
            const Tensor& a = nodes_[n.a].val;
            double s = 0.0;
            for (double v : a.values) s += v;
            n.val.values[0] = s;
            return;
        }
        case Op::kMean: {
            const Tensor& a = nodes_[n.a].val;
            double s = 0.0;
            for (double v : a.values) s += v;
            n.val.values[0] = s / static_cast<double>(a.size());
            return;
        }
        case Op::kSlice: {
            const Tensor& a = nodes_[n.a].val;
            std::copy(a.values.begin() + static_cast<std::ptrdiff_t>(n.offset),
                      a.values.begin() + static_cast<std::ptrdiff_t>(n.offset + n.val.size()),
                      n.val.values.begin());
            return;
        }
    }
}

void Graph::forward() {
    for (Node& n : nodes_) eval(n);
}

bool Graph::forward_finite(NodeId out) {
    forward();
    for (double v : nodes_[out].val.values)
        if (!std::isfinite(v)) return false;
    return true;
}

void Graph::accumulate(Node& n) {
    switch (n.op) {
        case Op::kInput:
        case Op::kConstant:
            return;
        case Op::kAdd:
        case Op::kSub:
        case Op::kMul: {
            Tensor& da = nodes_[n.a].grad;
            Tensor& db = nodes_[n.b].grad;
            const Tensor& a = nodes_[n.a].val;
            const Tensor& b = nodes_[n.b].val;
            const Tensor& g = n.grad;
            Broadcast k = broadcast_kind(a, b);
            std::size_t size = g.size();
            std::size_t cols = n.val.cols();
            double bsign = (n.op == Op::kSub) ? -1.0 : 1.0;
            for (std::size_t i = 0; i < size; ++i) {
                double gv = g.values[i];
                if (gv == 0.0) continue;
                double av = (k == Broadcast::kScalarA) ? a.values[0] : a.values[i];
                std::size_t bi;
                switch (k) {
                    case Broadcast::kScalarB: bi = 0; break;
                    case Broadcast::kRowB: bi = i % cols; break;
                    default: bi = i;
                }
                double bv = b.values[bi];
                std::size_t ai = (k == Broadcast::kScalarA) ? 0 : i;
                if (n.op == Op::kMul) {
                    da.values[ai] += gv * bv;
                    db.values[bi] += gv * av;
                } else {
                    da.values[ai] += gv;
                    db.values[bi] += bsign * gv;
                }
            }
            return;
        }
        case Op::kMatMul: {
            const Tensor& a = nodes_[n.a].val;
            const Tensor& b = nodes_[n.b].val;
            Tensor& da = nodes_[n.a].grad;
            Tensor& db = nodes_[n.b].grad;
            const Tensor& g = n.grad;
            std::size_t m = a.rows(), kdim = a.cols(), p = b.cols();
            // dA += g * B^T
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = g.values.data() + i * p;
                double* darow = da.values.data() + i * kdim;
                for (std::size_t k2 = 0; k2 < kdim; ++k2) {
                    const double* brow = b.values.data() + k2 * p;
                    double s = 0.0;
                    for (std::size_t j = 0; j < p; ++j) s += grow[j] * brow[j];
                    darow[k2] += s;
                }
            }
            // dB += A^T * g
            for (std::size_t i = 0; i < m; ++i) {
                const double* arow = a.values.data() + i * kdim;
                const double* grow = g.values.data() + i * p;
                for (std::size_t k2 = 0; k2 < kdim; ++k2) {
                    double av = arow[k2];
                    if (av == 0.0) continue;
                    double* dbrow = db.values.data() + k2 * p;
                    for (std::size_t j = 0; j < p; ++j) dbrow[j] += av * grow[j];
                }
            }
            return;
        }
        case Op::kRelu: {
            // Subgradient at exactly 0 is 0.
            const Tensor& a = nodes_[n.a].val;
            Tensor& da = nodes_[n.a].grad;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a.values[i] > 0.0) da.values[i] += n.grad.values[i];
            return;
        }
        case Op::kExp: {
            Tensor& da = nodes_[n.a].grad;
            for (std::size_t i = 0; i < n.val.size(); ++i)
                da.values[i] += n.grad.values[i] * n.val.values[i];
            return;
        }
        case Op::kLog: {
            const Tensor& a = nodes_[n.a].val;
            Tensor& da = nodes_[n.a].grad;
            for (std::size_t i = 0; i < a.size(); ++i)
                da.values[i] += n.grad.values[i] / a.values[i];
            return;
        }
        case Op::kAffine: {
            Tensor& da = nodes_[n.a].grad;
            for (std::size_t i = 0; i < n.val.size(); ++i)
                da.values[i] += n.grad.values[i] * n.k0;
            return;
        }
        case Op::kSum: {
            Tensor& da = nodes_[n.a].grad;
            double g = n.grad.values[0];
            for (double& v : da.values) v += g;
            return;
        }
        case Op::kMean: {
            Tensor& da = nodes_[n.a].grad;
            double g = n.grad.values[0] / static_cast<double>(da.size());
            for (double& v : da.values) v += g;
            return;
        }
        case Op::kSlice: {
            Tensor& da = nodes_[n.a].grad;
            for (std::size_t i = 0; i < n.val.size(); ++i)
                da.values[n.offset + i] += n.grad.values[i];
            return;
        }
    }
}

void Graph::backward(NodeId out) {
    if (nodes_[out].val.size() != 1)
        throw std::invalid_argument("Graph: backward requires a scalar output node");
    for (Node& n : nodes_)
        std::fill(n.grad.values.begin(), n.grad.values.end(), 0.0);
    nodes_[out].grad.values[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) accumulate(*it);
}

}  // namespace creepuq
