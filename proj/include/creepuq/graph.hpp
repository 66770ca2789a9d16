#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "creepuq/tensor.hpp"

namespace creepuq {

/// Reverse-mode autodiff over a static tape of tensor operations.
///
/// The graph is built once (topological order by construction) and then
/// re-evaluated many times: set_values() on input leaves, forward(),
/// backward(out). Buffers are allocated at build time, so a training or
/// HMC step performs no heap allocation.
///
/// Broadcasting in the binary elementwise ops covers the three cases the
/// models need: same shape, scalar (1-element) operand, and row vector
/// (1,n) against a (m,n) matrix.
class Graph {
public:
    using NodeId = std::int32_t;

    NodeId input(std::vector<std::size_t> shape);
    NodeId constant(Tensor value);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId matmul(NodeId a, NodeId b);
    NodeId relu(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    /// Elementwise k0 * x + k1.
    NodeId affine(NodeId a, double k0, double k1);
    NodeId square(NodeId a) { return mul(a, a); }
    NodeId neg(NodeId a) { return affine(a, -1.0, 0.0); }
    NodeId sum(NodeId a);
    NodeId mean(NodeId a);
    /// Contiguous view [offset, offset+count(shape)) of a flat node.
    /// Backward scatters gradient back into the range.
    NodeId slice(NodeId a, std::size_t offset, std::vector<std::size_t> shape);

    void set_values(NodeId id, const std::vector<double>& v);
    void set_values(NodeId id, const double* v, std::size_t n);

    Tensor& value(NodeId id) { return nodes_[id].val; }
    const Tensor& value(NodeId id) const { return nodes_[id].val; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
    double scalar_value(NodeId id) const;

    void forward();
    /// forward() + finite check on the given node; false on NaN/Inf.
    bool forward_finite(NodeId out);
    /// Reverse pass seeding d(out)=1. `out` must be scalar; forward() must
    /// have run. Gradients accumulate additively over fan-out.
    void backward(NodeId out);

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : std::uint8_t {
        kInput, kConstant, kAdd, kSub, kMul, kMatMul,
        kRelu, kExp, kLog, kAffine, kSum, kMean, kSlice
    };

    struct Node {
        Op op;
        NodeId a = -1;
        NodeId b = -1;
        std::size_t offset = 0;  // slice
        double k0 = 1.0, k1 = 0.0;  // affine
        Tensor val;
        Tensor grad;
    };

    enum class Broadcast : std::uint8_t { kNone, kScalarA, kScalarB, kRowB };

    NodeId push(Node n);
    static Broadcast broadcast_kind(const Tensor& a, const Tensor& b);
    void eval(Node& n);
    void accumulate(Node& n);

    std::vector<Node> nodes_;
};

}  // namespace creepuq
