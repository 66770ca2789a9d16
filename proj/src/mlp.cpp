#include "creepuq/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace creepuq {

std::size_t MlpArchitecture::parameter_count() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l)
        total += (layer_widths[l] + 1) * layer_widths[l + 1];
    return total;
}

void MlpArchitecture::validate() const {
    if (layer_widths.size() < 2)
        throw std::invalid_argument("MlpArchitecture: need at least input and output widths");
    for (std::size_t w : layer_widths)
        if (w == 0) throw std::invalid_argument("MlpArchitecture: zero-width layer");
}

std::vector<double> init_mlp_params(const MlpArchitecture& arch, Rng& rng) {
    arch.validate();
    std::vector<double> params;
    params.reserve(arch.parameter_count());
    for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
        std::size_t fan_in = arch.layer_widths[l];
        std::size_t fan_out = arch.layer_widths[l + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < fan_in * fan_out; ++i)
            params.push_back(rng.uniform(-bound, bound));
        for (std::size_t i = 0; i < fan_out; ++i)
            params.push_back(rng.uniform(-bound, bound));
    }
    return params;
}

std::vector<double> mlp_forward(const MlpArchitecture& arch,
                                const std::vector<double>& params, const Tensor& x) {
    arch.validate();
    if (params.size() != arch.parameter_count())
        throw std::invalid_argument("mlp_forward: parameter vector length mismatch");
    if (x.cols() != arch.input_width())
        throw std::invalid_argument("mlp_forward: input width mismatch");
    if (arch.output_width() != 1)
        throw std::invalid_argument("mlp_forward: scalar output expected");

    std::size_t batch = x.rows();
    std::vector<double> cur(x.values);
    std::size_t cur_w = arch.input_width();
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
        std::size_t w_in = arch.layer_widths[l];
        std::size_t w_out = arch.layer_widths[l + 1];
        const double* w = params.data() + off;
        const double* b = params.data() + off + w_in * w_out;
        off += (w_in + 1) * w_out;
        std::vector<double> next(batch * w_out);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* in = cur.data() + r * cur_w;
            double* out = next.data() + r * w_out;
            for (std::size_t j = 0; j < w_out; ++j) out[j] = b[j];
            for (std::size_t i = 0; i < w_in; ++i) {
                double v = in[i];
                if (v == 0.0) continue;
                const double* wrow = w + i * w_out;
                for (std::size_t j = 0; j < w_out; ++j) out[j] += v * wrow[j];
            }
        }
        bool last = (l + 2 == arch.layer_widths.size());
        if (!last)
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        cur = std::move(next);
        cur_w = w_out;
    }
    return cur;
}

MlpGraphOutput build_mlp_graph(Graph& g, const MlpArchitecture& arch,
                               Graph::NodeId params, Graph::NodeId x,
                               bool dropout_masks) {
    arch.validate();
    if (g.value(x).cols() != arch.input_width())
        throw std::invalid_argument("build_mlp_graph: input width mismatch");
    std::size_t batch = g.value(x).rows();

    MlpGraphOutput out;
    Graph::NodeId h = x;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
        std::size_t w_in = arch.layer_widths[l];
        std::size_t w_out = arch.layer_widths[l + 1];
        Graph::NodeId w = g.slice(params, off, {w_in, w_out});
        off += w_in * w_out;
        Graph::NodeId b = g.slice(params, off, {w_out});
        off += w_out;
        h = g.add(g.matmul(h, w), b);
        bool last = (l + 2 == arch.layer_widths.size());
        if (!last) {
            h = g.relu(h);
            if (dropout_masks) {
                Graph::NodeId mask = g.input({batch, w_out});
                g.set_values(mask, std::vector<double>(batch * w_out, 1.0));
                h = g.mul(h, mask);
                out.dropout_masks.push_back(mask);
            }
        }
    }
    if (off != g.value(params).size())
        throw std::invalid_argument("build_mlp_graph: parameter node size mismatch");
    out.output = h;
    return out;
}

}  // namespace creepuq
