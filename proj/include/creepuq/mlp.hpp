#pragma once

#include <cstdint>
#include <vector>

#include "creepuq/graph.hpp"
#include "creepuq/rng.hpp"
#include "creepuq/tensor.hpp"

namespace creepuq {

/// Fully-connected ReLU network description: input width, hidden widths,
/// output width. Hidden activations are ReLU, output is identity.
struct MlpArchitecture {
    std::vector<std::size_t> layer_widths;

    std::size_t layer_count() const { return layer_widths.size() - 1; }
    std::size_t input_width() const { return layer_widths.front(); }
    std::size_t output_width() const { return layer_widths.back(); }

    /// Sum of (w_in + 1) * w_out over layers (weights + biases).
    std::size_t parameter_count() const;

    void validate() const;  // >= 2 widths, all positive
};

/// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
std::vector<double> init_mlp_params(const MlpArchitecture& arch, Rng& rng);

/// Plain (non-graph) forward pass over a batch; returns one output per row.
/// Output width must be 1.
std::vector<double> mlp_forward(const MlpArchitecture& arch,
                                const std::vector<double>& params, const Tensor& x);

/// Graph-based forward pass from a flat parameter node. When
/// `dropout_masks` is true an input node per hidden layer is created and
/// multiplied in after the activation; callers fill masks with samples of
/// {0, 1/(1-rate)} (inverted dropout) or all-ones.
struct MlpGraphOutput {
    Graph::NodeId output;                      // (batch, output_width)
    std::vector<Graph::NodeId> dropout_masks;  // one per hidden layer, optional
};

MlpGraphOutput build_mlp_graph(Graph& g, const MlpArchitecture& arch,
                               Graph::NodeId params, Graph::NodeId x,
                               bool dropout_masks = false);

}  // namespace creepuq
