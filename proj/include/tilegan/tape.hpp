#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilegan/common.hpp"
#include "tilegan/sepblur.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan::ad {

using node_id = std::int32_t;
constexpr node_id no_node = -1;

enum class op_kind : std::uint8_t {
    leaf,
    matmul,
    transpose,
    add,
    sub,
    hadamard,
    affine,        // p0 * a + p1, elementwise
    add_rowvec,    // (BxN) + (1xN)
    col_sum,       // BxN -> 1xN
    row_sum,       // BxN -> Bx1
    sum_all,       // -> 1x1
    bcast_scalar,  // 1x1 -> i0 x i1
    bcast_row,     // 1xN -> i0 x N
    bcast_col,     // Bx1 -> B x i0
    relu,
    relu_mask,    // d(relu)/dx with the subgradient at 0 taken as 0; detached
    leaky_relu,   // slope p0
    leaky_mask,   // detached
    tanh_op,
    sigmoid_op,
    log_op,
    exp_op,
    sqrt_op,        // derivative at 0 defined as 0
    half_inv_sqrt,  // 0.5 / sqrt-value, 0 where the sqrt value is 0
    reciprocal,
    slice_cols,   // columns [i0, i0+i1)
    pad_cols,     // place into zero matrix of width i1 at offset i0
    gather_rows,  // rows of a selected by idx
    scatter_rows, // adjoint of gather_rows; i0 = total rows
    row_max,      // detached rowwise max, Bx1
    blur2d,       // per-row HxW separable Gaussian; i0=H i1=W i2=k i3=mode p0=sigma
    blur2d_adj,
};

struct node {
    op_kind op = op_kind::leaf;
    node_id a = no_node;
    node_id b = no_node;
    double p0 = 0.0;
    double p1 = 0.0;
    int i0 = 0, i1 = 0, i2 = 0, i3 = 0;
    std::vector<std::int32_t> idx;  // gather/scatter row indices
    tensor2 value;
    bool needs_grad = false;
    int param_tag = -1;  // >= 0 marks a registered parameter leaf
};

// Append-only record of tensor operations. Every value is computed eagerly
// at emission; replay() re-executes the record and must reproduce the stored
// values bit for bit. backward() emits the adjoint computation as ordinary
// nodes on the same tape, which is what makes gradients of gradients (the
// gradient-penalty term) just another backward() call.
class tape {
  public:
    std::size_t size() const { return nodes_.size(); }
    const node& at(node_id id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const tensor2& value(node_id id) const { return at(id).value; }

    node_id constant(tensor2 v) { return emit_leaf(std::move(v), false, -1); }

    node_id input(tensor2 v, bool needs_grad = false) {
        return emit_leaf(std::move(v), needs_grad, -1);
    }

    node_id param(tensor2 v, int tag) {
        require(tag >= 0, "param: tag must be non-negative");
        node_id id = emit_leaf(std::move(v), true, tag);
        param_leaves_.push_back(id);
        return id;
    }

    const std::vector<node_id>& param_leaves() const { return param_leaves_; }

    node_id matmul(node_id a, node_id b) {
        if (value(a).cols() != value(b).rows())
            throw shape_error("matmul: inner dimensions disagree (" +
                              std::to_string(value(a).cols()) + " vs " +
                              std::to_string(value(b).rows()) + ")");
        return emit(op_kind::matmul, a, b);
    }
    node_id transpose(node_id a) { return emit(op_kind::transpose, a); }
    node_id add(node_id a, node_id b) {
        check_same_shape(a, b, "add");
        return emit(op_kind::add, a, b);
    }
    node_id sub(node_id a, node_id b) {
        check_same_shape(a, b, "sub");
        return emit(op_kind::sub, a, b);
    }
    node_id hadamard(node_id a, node_id b) {
        check_same_shape(a, b, "hadamard");
        return emit(op_kind::hadamard, a, b);
    }
    node_id affine(node_id a, double mul, double shift) {
        node n = make(op_kind::affine, a);
        n.p0 = mul;
        n.p1 = shift;
        return push(std::move(n));
    }
    node_id scale(node_id a, double mul) { return affine(a, mul, 0.0); }
    node_id add_rowvec(node_id a, node_id v) {
        require(value(v).rows() == 1 && value(v).cols() == value(a).cols(),
                "add_rowvec: v must be 1 x cols(a)");
        return emit(op_kind::add_rowvec, a, v);
    }
    node_id col_sum(node_id a) { return emit(op_kind::col_sum, a); }
    node_id row_sum(node_id a) { return emit(op_kind::row_sum, a); }
    node_id sum_all(node_id a) { return emit(op_kind::sum_all, a); }
    node_id mean_all(node_id a) {
        return scale(sum_all(a), 1.0 / static_cast<double>(value(a).size()));
    }
    node_id bcast_scalar(node_id a, int rows, int cols) {
        require(value(a).size() == 1, "bcast_scalar: input must be 1x1");
        node n = make(op_kind::bcast_scalar, a);
        n.i0 = rows;
        n.i1 = cols;
        return push(std::move(n));
    }
    node_id bcast_row(node_id a, int rows) {
        require(value(a).rows() == 1, "bcast_row: input must be 1xN");
        node n = make(op_kind::bcast_row, a);
        n.i0 = rows;
        return push(std::move(n));
    }
    node_id bcast_col(node_id a, int cols) {
        require(value(a).cols() == 1, "bcast_col: input must be Bx1");
        node n = make(op_kind::bcast_col, a);
        n.i0 = cols;
        return push(std::move(n));
    }
    node_id relu(node_id a) { return emit(op_kind::relu, a); }
    node_id leaky_relu(node_id a, double slope) {
        node n = make(op_kind::leaky_relu, a);
        n.p0 = slope;
        return push(std::move(n));
    }
    node_id tanh(node_id a) { return emit(op_kind::tanh_op, a); }
    node_id sigmoid(node_id a) { return emit(op_kind::sigmoid_op, a); }
    node_id log(node_id a) { return emit(op_kind::log_op, a); }
    node_id exp(node_id a) { return emit(op_kind::exp_op, a); }
    node_id sqrt(node_id a) { return emit(op_kind::sqrt_op, a); }
    node_id reciprocal(node_id a) { return emit(op_kind::reciprocal, a); }
    node_id slice_cols(node_id a, int begin, int len) {
        require(begin >= 0 && len >= 1 && begin + len <= value(a).cols(),
                "slice_cols: range out of bounds");
        node n = make(op_kind::slice_cols, a);
        n.i0 = begin;
        n.i1 = len;
        return push(std::move(n));
    }
    node_id gather_rows(node_id a, std::vector<std::int32_t> rows) {
        for (auto r : rows)
            require(r >= 0 && r < value(a).rows(), "gather_rows: index out of range");
        node n = make(op_kind::gather_rows, a);
        n.idx = std::move(rows);
        return push(std::move(n));
    }
    // rowwise max treated as a constant; used to stabilize log-softmax
    node_id row_max_detached(node_id a) {
        node n = make(op_kind::row_max, a);
        n.needs_grad = false;
        return push(std::move(n));
    }
    node_id blur2d(node_id a, int h, int w, int k, double sigma,
                   detail::boundary_mode mode) {
        require(value(a).cols() == static_cast<Eigen::Index>(h) * w,
                "blur2d: row length must equal h*w");
        require(k >= 1 && k % 2 == 1 && k <= std::min(h, w),
                "blur2d: kernel must be odd and fit the image");
        node n = make(op_kind::blur2d, a);
        n.i0 = h;
        n.i1 = w;
        n.i2 = k;
        n.i3 = mode == detail::boundary_mode::periodic ? 1 : 0;
        n.p0 = sigma;
        return push(std::move(n));
    }

    // Reverse pass from a scalar root. Emits the adjoint computation onto the
    // tape and returns, per pre-existing node, the id of its adjoint (no_node
    // where no gradient reaches). Calling backward() on a function of the
    // returned adjoint nodes yields second derivatives. When `toward` names a
    // node, only the part of the chain that can reach it is emitted — the rest
    // of the adjoints cannot influence that node and would be dead weight.
    std::vector<node_id> backward(node_id root, double seed = 1.0,
                                  node_id toward = no_node) {
        require(root >= 0 && root < static_cast<node_id>(nodes_.size()),
                "backward: bad root");
        if (value(root).size() != 1)
            throw contract_error("backward: root must be a scalar node");
        const node_id limit = root;
        std::vector<char> reach;
        if (toward != no_node) {
            require(toward >= 0 && toward <= limit, "backward: bad target node");
            reach.assign(static_cast<std::size_t>(limit) + 1, 0);
            reach[static_cast<std::size_t>(toward)] = 1;
            for (node_id id = toward + 1; id <= limit; ++id) {
                const node& n = nodes_[static_cast<std::size_t>(id)];
                if ((n.a != no_node && reach[static_cast<std::size_t>(n.a)]) ||
                    (n.b != no_node && reach[static_cast<std::size_t>(n.b)]))
                    reach[static_cast<std::size_t>(id)] = 1;
            }
        }
        std::vector<node_id> adj(static_cast<std::size_t>(limit) + 1, no_node);
        {
            tensor2 s(1, 1);
            s(0, 0) = seed;
            adj[static_cast<std::size_t>(root)] = constant(std::move(s));
        }
        const std::vector<char>* filter = reach.empty() ? nullptr : &reach;
        for (node_id id = limit; id >= 0; --id) {
            const node_id g = adj[static_cast<std::size_t>(id)];
            if (g == no_node) continue;
            if (!at(id).needs_grad) continue;
            if (filter && !(*filter)[static_cast<std::size_t>(id)]) continue;
            emit_adjoints(id, g, adj, filter);
        }
        return adj;
    }

    // Re-execute every non-leaf node from its recorded inputs.
    void replay() {
        for (auto& n : nodes_)
            if (n.op != op_kind::leaf) n.value = compute(n);
    }

  private:
    std::vector<node> nodes_;
    std::vector<node_id> param_leaves_;

    void check_same_shape(node_id a, node_id b, const char* what) const {
        if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
            throw shape_error(std::string(what) + ": operand shapes disagree");
    }

    node make(op_kind op, node_id a, node_id b = no_node) const {
        node n;
        n.op = op;
        n.a = a;
        n.b = b;
        n.needs_grad = (a != no_node && at(a).needs_grad) ||
                       (b != no_node && at(b).needs_grad);
        return n;
    }

    node_id emit(op_kind op, node_id a, node_id b = no_node) {
        return push(make(op, a, b));
    }

    node_id emit_leaf(tensor2 v, bool needs_grad, int tag) {
        require(all_finite(v), "leaf: non-finite entries");
        node n;
        n.op = op_kind::leaf;
        n.value = std::move(v);
        n.needs_grad = needs_grad;
        n.param_tag = tag;
        nodes_.push_back(std::move(n));
        return static_cast<node_id>(nodes_.size() - 1);
    }

    node_id push(node n) {
        n.value = compute(n);
        nodes_.push_back(std::move(n));
        return static_cast<node_id>(nodes_.size() - 1);
    }

    tensor2 compute(const node& n) const {
        if (n.op == op_kind::leaf) return n.value;
        const tensor2& a = value(n.a);
        switch (n.op) {
            case op_kind::leaf:
                return n.value;
            case op_kind::matmul:
                return a * value(n.b);
            case op_kind::transpose:
                return a.transpose();
            case op_kind::add:
                return a + value(n.b);
            case op_kind::sub:
                return a - value(n.b);
            case op_kind::hadamard:
                return a.cwiseProduct(value(n.b));
            case op_kind::affine:
                return (n.p0 * a.array() + n.p1).matrix();
            case op_kind::add_rowvec: {
                tensor2 out = a;
                out.rowwise() += value(n.b).row(0);
                return out;
            }
            case op_kind::col_sum:
                return a.colwise().sum();
            case op_kind::row_sum:
                return a.rowwise().sum();
            case op_kind::sum_all: {
                tensor2 out(1, 1);
                out(0, 0) = a.sum();
                return out;
            }
            case op_kind::bcast_scalar:
                return tensor2::Constant(n.i0, n.i1, a(0, 0));
            case op_kind::bcast_row:
                return a.replicate(n.i0, 1);
            case op_kind::bcast_col:
                return a.replicate(1, n.i0);
            case op_kind::relu:
                return a.cwiseMax(0.0);
            case op_kind::relu_mask:
                return a.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
            case op_kind::leaky_relu: {
                const double s = n.p0;
                return a.unaryExpr([s](double x) { return x > 0.0 ? x : s * x; });
            }
            case op_kind::leaky_mask: {
                const double s = n.p0;
                return a.unaryExpr([s](double x) { return x > 0.0 ? 1.0 : s; });
            }
            case op_kind::tanh_op:
                return a.array().tanh().matrix();
            case op_kind::sigmoid_op:
                return a.unaryExpr(
                    [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
            case op_kind::log_op:
                return a.array().log().matrix();
            case op_kind::exp_op:
                return a.array().exp().matrix();
            case op_kind::sqrt_op:
                return a.array().sqrt().matrix();
            case op_kind::half_inv_sqrt:
                // a holds the sqrt values themselves
                return a.unaryExpr(
                    [](double y) { return y == 0.0 ? 0.0 : 0.5 / y; });
            case op_kind::reciprocal:
                return a.cwiseInverse();
            case op_kind::slice_cols:
                return a.middleCols(n.i0, n.i1);
            case op_kind::pad_cols: {
                tensor2 out = tensor2::Zero(a.rows(), n.i1);
                out.middleCols(n.i0, a.cols()) = a;
                return out;
            }
            case op_kind::gather_rows: {
                tensor2 out(static_cast<Eigen::Index>(n.idx.size()), a.cols());
                for (std::size_t r = 0; r < n.idx.size(); ++r)
                    out.row(static_cast<Eigen::Index>(r)) = a.row(n.idx[r]);
                return out;
            }
            case op_kind::scatter_rows: {
                tensor2 out = tensor2::Zero(n.i0, a.cols());
                for (std::size_t r = 0; r < n.idx.size(); ++r)
                    out.row(n.idx[r]) += a.row(static_cast<Eigen::Index>(r));
                return out;
            }
            case op_kind::row_max:
                return a.rowwise().maxCoeff();
            case op_kind::blur2d:
            case op_kind::blur2d_adj: {
                const auto taps = detail::gaussian_taps(n.i2, n.p0);
                const auto mode = n.i3 ? detail::boundary_mode::periodic
                                       : detail::boundary_mode::reflect;
                tensor2 out(a.rows(), a.cols());
                for (Eigen::Index r = 0; r < a.rows(); ++r) {
                    if (n.op == op_kind::blur2d)
                        detail::blur2d_buffer(a.row(r).data(), out.row(r).data(),
                                              n.i0, n.i1, taps, mode);
                    else
                        detail::blur2d_buffer_adjoint(a.row(r).data(),
                                                      out.row(r).data(), n.i0,
                                                      n.i1, taps, mode);
                }
                return out;
            }
        }
        throw contract_error("compute: unknown op");
    }

    void accumulate(std::vector<node_id>& adj, node_id target, node_id contrib) {
        auto& slot = adj[static_cast<std::size_t>(target)];
        slot = slot == no_node ? contrib : add(slot, contrib);
    }

    bool wants_grad(node_id id, const std::vector<char>* filter = nullptr) const {
        if (id == no_node || !at(id).needs_grad) return false;
        return !filter || (*filter)[static_cast<std::size_t>(id)];
    }

    node_id detached_mask(op_kind kind, node_id a, double slope = 0.0) {
        node n = make(kind, a);
        n.p0 = slope;
        n.needs_grad = false;
        return push(std::move(n));
    }

    void emit_adjoints(node_id id, node_id g, std::vector<node_id>& adj,
                       const std::vector<char>* filter) {
        const node& n = at(id);
        switch (n.op) {
            case op_kind::leaf:
                return;
            case op_kind::matmul:
                if (wants_grad(n.a, filter))
                    accumulate(adj, n.a, matmul(g, transpose(n.b)));
                if (wants_grad(n.b, filter))
                    accumulate(adj, n.b, matmul(transpose(n.a), g));
                return;
            case op_kind::transpose:
                accumulate(adj, n.a, transpose(g));
                return;
            case op_kind::add:
                if (wants_grad(n.a, filter)) accumulate(adj, n.a, g);
                if (wants_grad(n.b, filter)) accumulate(adj, n.b, g);
                return;
            case op_kind::sub:
                if (wants_grad(n.a, filter)) accumulate(adj, n.a, g);
                if (wants_grad(n.b, filter)) accumulate(adj, n.b, scale(g, -1.0));
                return;
            case op_kind::hadamard:
                if (wants_grad(n.a, filter)) accumulate(adj, n.a, hadamard(g, n.b));
                if (wants_grad(n.b, filter)) accumulate(adj, n.b, hadamard(g, n.a));
                return;
            case op_kind::affine:
                accumulate(adj, n.a, scale(g, n.p0));
                return;
            case op_kind::add_rowvec:
                if (wants_grad(n.a, filter)) accumulate(adj, n.a, g);
                if (wants_grad(n.b, filter)) accumulate(adj, n.b, col_sum(g));
                return;
            case op_kind::col_sum:
                accumulate(adj, n.a, bcast_row(g, static_cast<int>(value(n.a).rows())));
                return;
            case op_kind::row_sum:
                accumulate(adj, n.a, bcast_col(g, static_cast<int>(value(n.a).cols())));
                return;
            case op_kind::sum_all:
                accumulate(adj, n.a,
                           bcast_scalar(g, static_cast<int>(value(n.a).rows()),
                                        static_cast<int>(value(n.a).cols())));
                return;
            case op_kind::bcast_scalar:
                accumulate(adj, n.a, sum_all(g));
                return;
            case op_kind::bcast_row:
                accumulate(adj, n.a, col_sum(g));
                return;
            case op_kind::bcast_col:
                accumulate(adj, n.a, row_sum(g));
                return;
            case op_kind::relu:
                accumulate(adj, n.a,
                           hadamard(g, detached_mask(op_kind::relu_mask, n.a)));
                return;
            case op_kind::leaky_relu:
                accumulate(adj, n.a,
                           hadamard(g, detached_mask(op_kind::leaky_mask, n.a, n.p0)));
                return;
            case op_kind::relu_mask:
            case op_kind::leaky_mask:
            case op_kind::row_max:
                return;  // piecewise constant; derivative defined as 0
            case op_kind::tanh_op: {
                // d tanh = 1 - y^2, expressed through the output node
                node_id sq = hadamard(id, id);
                accumulate(adj, n.a, hadamard(g, affine(sq, -1.0, 1.0)));
                return;
            }
            case op_kind::sigmoid_op: {
                node_id one_minus = affine(id, -1.0, 1.0);
                accumulate(adj, n.a, hadamard(g, hadamard(id, one_minus)));
                return;
            }
            case op_kind::log_op:
                accumulate(adj, n.a, hadamard(g, reciprocal(n.a)));
                return;
            case op_kind::exp_op:
                accumulate(adj, n.a, hadamard(g, id));
                return;
            case op_kind::sqrt_op: {
                node_id half = emit(op_kind::half_inv_sqrt, id);
                accumulate(adj, n.a, hadamard(g, half));
                return;
            }
            case op_kind::half_inv_sqrt: {
                // d(0.5/y)/dy = -2 * (0.5/y)^2; stays 0 where y == 0
                node_id sq = hadamard(id, id);
                accumulate(adj, n.a, hadamard(g, scale(sq, -2.0)));
                return;
            }
            case op_kind::reciprocal: {
                node_id sq = hadamard(id, id);
                accumulate(adj, n.a, hadamard(g, scale(sq, -1.0)));
                return;
            }
            case op_kind::slice_cols: {
                node m = make(op_kind::pad_cols, g);
                m.i0 = n.i0;
                m.i1 = static_cast<int>(value(n.a).cols());
                accumulate(adj, n.a, push(std::move(m)));
                return;
            }
            case op_kind::pad_cols:
                accumulate(adj, n.a,
                           slice_cols(g, n.i0, static_cast<int>(value(n.a).cols())));
                return;
            case op_kind::gather_rows: {
                node m = make(op_kind::scatter_rows, g);
                m.idx = n.idx;
                m.i0 = static_cast<int>(value(n.a).rows());
                accumulate(adj, n.a, push(std::move(m)));
                return;
            }
            case op_kind::scatter_rows: {
                node m = make(op_kind::gather_rows, g);
                m.idx = n.idx;
                accumulate(adj, n.a, push(std::move(m)));
                return;
            }
            case op_kind::blur2d:
            case op_kind::blur2d_adj: {
                node m = make(n.op == op_kind::blur2d ? op_kind::blur2d_adj
                                                      : op_kind::blur2d,
                              g);
                m.i0 = n.i0;
                m.i1 = n.i1;
                m.i2 = n.i2;
                m.i3 = n.i3;
                m.p0 = n.p0;
                accumulate(adj, n.a, push(std::move(m)));
                return;
            }
            default:
                throw contract_error("backward: op without adjoint rule");
        }
    }
};

}  // namespace tilegan::ad
