// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tdmda::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

/// Handle to a dense real array, optionally attached to a tape node so
/// that gradients can flow back through it.
struct Tensor {
    Shape shape;
    std::shared_ptr<const std::vector<double>> data;
    Tape* tape = nullptr;
    int node = -1;
    bool requires_grad = false;

    const std::vector<double>& values() const { return *data; }
    double scalar() const;
    std::size_t size() const { return data ? data->size() : 0; }
    // Rank-2 accessors; a rank-1 tensor is treated as a single row.
    std::size_t rows() const;
    std::size_t cols() const;
};

Tensor constant(Shape shape, std::vector<double> values);
Tensor full(Shape shape, double value);

/// Define-by-run record of one forward pass. Rebuilt per pass; nodes are
/// stored in topological order by construction.
class Tape {
public:
    // grads[node] is empty until the node is reached during backward.
    using GradMap = std::vector<std::vector<double>>;
    using BackwardFn = std::function<void(const std::vector<double>& gout, GradMap& grads)>;

    Tensor leaf(Shape shape, std::shared_ptr<const std::vector<double>> values,
                bool requires_grad = true);
    Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = true);

    /// Reverse sweep from a scalar root. Gradients accumulate across
    /// fan-out; every node is visited at most once.
    GradMap backward(const Tensor& root) const;

    int record(Shape out_shape, std::vector<int> input_nodes, BackwardFn fn);
    std::size_t node_count() const { return nodes_.size(); }
    const Shape& node_shape(int node) const { return nodes_[static_cast<std::size_t>(node)].shape; }

private:
    struct Node {
        Shape shape;
        std::vector<int> inputs;
        BackwardFn backward;  // empty for leaves
    };
    std::vector<Node> nodes_;
};

/// Lazily sized accumulation buffer for one node's gradient.
std::vector<double>& grad_buffer(Tape::GradMap& grads, int node, std::size_t n);

// --- Operations -------------------------------------------------------
// Each records itself on the tape when any input requires a gradient and
// implements the exact backward rule for its forward definition.

Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_b = false);
Tensor add(const Tensor& a, const Tensor& b);  // broadcasts a rank-1 b over rows of a
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor relu(const Tensor& x);  // gradient at exactly 0 is 0
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);  // natural log; errors on non-positive values
Tensor softmax(const Tensor& x, std::size_t axis);  // max-subtracted
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);
Tensor select_positive(const Tensor& x, double floor_value);  // x >= 0 ? x : floor
Tensor dropout_apply(const Tensor& x, const std::vector<double>& mask);
Tensor scale(const Tensor& x, double c);
Tensor sigmoid(const Tensor& x);
Tensor square(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);
Tensor grad_reverse(const Tensor& x, double lambda);  // identity forward, -lambda backward
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);

/// Same values, no tape node, no gradient.
Tensor detach(const Tensor& t);

}  // namespace tdmda::ad
