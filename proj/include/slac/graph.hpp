#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "slac/rng.hpp"
#include "slac/tensor.hpp"

namespace slac {

enum class Mode { Train, Eval };

// Dynamic reverse-mode tape. Nodes are appended in evaluation order
// (construction is the forward pass), so reverse insertion order is a
// valid topological order for backward(). Every op validates shapes and
// rejects non-finite outputs.
class Graph {
public:
    using Id = int;

    Id leaf(Tensor value, bool requires_grad = false);

    const Tensor& value(Id id) const { return nodes_[id].value; }
    const Tensor& grad(Id id) const { return nodes_[id].grad; }
    bool requires_grad(Id id) const { return nodes_[id].requires_grad; }

    Id matmul(Id a, Id b);
    // a (r x k) times transpose of b (c x k) -> r x c
    Id matmul_nt(Id a, Id b);
    Id add(Id a, Id b);
    // broadcast a 1 x c row over every row of a
    Id add_row(Id a, Id row);
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);
    Id scale(Id a, double c);
    Id tanh_(Id a);
    Id log_(Id a);
    Id softmax_rows(Id a);
    Id layer_norm(Id x, Id gamma, Id beta, double eps = 1e-5);
    Id dropout(Id a, double p, Mode mode, Rng& rng);
    Id concat_cols(const std::vector<Id>& parts);
    Id slice_cols(Id a, std::size_t start, std::size_t len);
    Id transpose(Id a);
    // row gather from an embedding table; gradients scatter-add
    Id gather_rows(Id table, std::vector<std::size_t> indices);
    Id sum(Id a);

    // loss must be scalar (1 x 1); accumulates into grad slots additively
    void backward(Id loss);

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::function<void()> back;
    };

    Id push(Tensor value, bool requires_grad, std::function<void()> back);
    void ensure_grad(Id id);
    static void check_finite(const Tensor& t, const char* op);

    std::vector<Node> nodes_;
};

}  // namespace slac
