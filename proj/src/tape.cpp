#include "tanhseed/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace tanhseed {

namespace {

bool is_scalar(const Mat& m) { return m.rows() == 1 && m.cols() == 1; }

// Output shape of a broadcasting elementwise op: shapes must match or one
// side must be 1x1.
std::pair<std::size_t, std::size_t> bcast_shape(const Mat& a, const Mat& b) {
    if (a.same_shape(b) || is_scalar(b)) return {a.rows(), a.cols()};
    if (is_scalar(a)) return {b.rows(), b.cols()};
    throw std::invalid_argument("elementwise op: shape mismatch");
}

double at_bcast(const Mat& m, std::size_t i, std::size_t j) {
    return is_scalar(m) ? m(0, 0) : m(i, j);
}

}  // namespace

Value Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Value{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

void Tape::check_mine(Value v) const {
    if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
        throw std::invalid_argument("value does not belong to this tape");
}

Value Tape::leaf(Mat m) {
    if (m.empty()) throw std::invalid_argument("leaf: empty matrix");
    Node n;
    n.op = Op::LEAF;
    n.val = std::move(m);
    return push(std::move(n));
}

Value Tape::scalar(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return leaf(std::move(m));
}

Value Tape::add(Value a, Value b) {
    check_mine(a);
    check_mine(b);
    const Mat &ma = mat(a.id), &mb = mat(b.id);
    auto [r, c] = bcast_shape(ma, mb);
    Node n{Op::ADD, a.id, b.id, Mat(r, c), {}};
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            n.val(i, j) = at_bcast(ma, i, j) + at_bcast(mb, i, j);
    return push(std::move(n));
}

Value Tape::sub(Value a, Value b) {
    check_mine(a);
    check_mine(b);
    const Mat &ma = mat(a.id), &mb = mat(b.id);
    auto [r, c] = bcast_shape(ma, mb);
    Node n{Op::SUB, a.id, b.id, Mat(r, c), {}};
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            n.val(i, j) = at_bcast(ma, i, j) - at_bcast(mb, i, j);
    return push(std::move(n));
}

Value Tape::mul(Value a, Value b) {
    check_mine(a);
    check_mine(b);
    const Mat &ma = mat(a.id), &mb = mat(b.id);
    auto [r, c] = bcast_shape(ma, mb);
    Node n{Op::MUL, a.id, b.id, Mat(r, c), {}};
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            n.val(i, j) = at_bcast(ma, i, j) * at_bcast(mb, i, j);
    return push(std::move(n));
}

Value Tape::div(Value a, Value b) {
    check_mine(a);
    check_mine(b);
    const Mat &ma = mat(a.id), &mb = mat(b.id);
    auto [r, c] = bcast_shape(ma, mb);
    Node n{Op::DIV, a.id, b.id, Mat(r, c), {}};
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            n.val(i, j) = at_bcast(ma, i, j) / at_bcast(mb, i, j);
    return push(std::move(n));
}

Value Tape::matmul(Value a, Value b) {
    check_mine(a);
    check_mine(b);
    const Mat &ma = mat(a.id), &mb = mat(b.id);
    if (ma.cols() != mb.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    Node n{Op::MATMUL, a.id, b.id, Mat(ma.rows(), mb.cols()), {}};
    matmul_acc(ma, mb, n.val);
    return push(std::move(n));
}

Value Tape::add_bias(Value a, Value bias) {
    check_mine(a);
    check_mine(bias);
    const Mat &ma = mat(a.id), &mb = mat(bias.id);
    if (mb.cols() != 1 || mb.rows() != ma.rows())
        throw std::invalid_argument("add_bias: bias must be (rows x 1)");
    Node n{Op::ADD_BIAS, a.id, bias.id, Mat(ma.rows(), ma.cols()), {}};
    for (std::size_t i = 0; i < ma.rows(); ++i)
        for (std::size_t j = 0; j < ma.cols(); ++j)
            n.val(i, j) = ma(i, j) + mb(i, 0);
    return push(std::move(n));
}

Value Tape::tanh(Value a) {
    check_mine(a);
    const Mat& ma = mat(a.id);
    Node n{Op::TANH, a.id, -1, Mat(ma.rows(), ma.cols()), {}};
    for (std::size_t i = 0; i < ma.size(); ++i) n.val.data()[i] = std::tanh(ma.data()[i]);
    return push(std::move(n));
}

Value Tape::square(Value a) {
    check_mine(a);
    const Mat& ma = mat(a.id);
    Node n{Op::SQUARE, a.id, -1, Mat(ma.rows(), ma.cols()), {}};
    for (std::size_t i = 0; i < ma.size(); ++i) n.val.data()[i] = ma.data()[i] * ma.data()[i];
    return push(std::move(n));
}

Value Tape::exp(Value a) {
    check_mine(a);
    const Mat& ma = mat(a.id);
    Node n{Op::EXP, a.id, -1, Mat(ma.rows(), ma.cols()), {}};
    for (std::size_t i = 0; i < ma.size(); ++i) n.val.data()[i] = std::exp(ma.data()[i]);
    return push(std::move(n));
}

Value Tape::log(Value a) {
    check_mine(a);
    const Mat& ma = mat(a.id);
    Node n{Op::LOG, a.id, -1, Mat(ma.rows(), ma.cols()), {}};
    for (std::size_t i = 0; i < ma.size(); ++i) n.val.data()[i] = std::log(ma.data()[i]);
    return push(std::move(n));
}

Value Tape::sum(Value a) {
    check_mine(a);
    const Mat& ma = mat(a.id);
    double s = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) s += ma.data()[i];
    Node n{Op::SUM, a.id, -1, Mat(1, 1), {}};
    n.val(0, 0) = s;
    return push(std::move(n));
}

Value Tape::mean(Value a) {
    check_mine(a);
    const Mat& ma = mat(a.id);
    if (ma.size() == 0) throw std::invalid_argument("mean: empty matrix");
    double s = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) s += ma.data()[i];
    Node n{Op::MEAN, a.id, -1, Mat(1, 1), {}};
    n.val(0, 0) = s / static_cast<double>(ma.size());
    return push(std::move(n));
}

Value Tape::softmax_ce(Value logits, std::span<const int> labels) {
    check_mine(logits);
    const Mat& z = mat(logits.id);
    if (labels.size() != z.cols())
        throw std::invalid_argument("softmax_ce: one label per column required");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= z.rows())
            throw std::invalid_argument("softmax_ce: label out of range");
    double total = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) {
        double mx = z(0, j);
        for (std::size_t i = 1; i < z.rows(); ++i) mx = std::max(mx, z(i, j));
        double se = 0.0;
        for (std::size_t i = 0; i < z.rows(); ++i) se += std::exp(z(i, j) - mx);
        total += mx + std::log(se) - z(static_cast<std::size_t>(labels[j]), j);
    }
    Node n{Op::SOFTMAX_CE, logits.id, -1, Mat(1, 1), {labels.begin(), labels.end()}};
    n.val(0, 0) = total / static_cast<double>(z.cols());
    return push(std::move(n));
}

const Mat& Tape::val(Value v) const {
    check_mine(v);
    return nodes_[v.id].val;
}

double Tape::scalar_val(Value v) const {
    const Mat& m = val(v);
    if (!is_scalar(m)) throw std::invalid_argument("scalar_val: node is not 1x1");
    return m(0, 0);
}

namespace {

// g is the adjoint of a broadcast result; fold it back onto a parent that
// may have been a 1x1 scalar.
void acc_bcast(Mat& dst, const Mat& g, bool negate = false) {
    const double sgn = negate ? -1.0 : 1.0;
    if (dst.same_shape(g)) {
        for (std::size_t i = 0; i < g.size(); ++i) dst.data()[i] += sgn * g.data()[i];
        return;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.data()[i];
    dst(0, 0) += sgn * s;
}

}  // namespace

void Tape::backward_sweep(Value out, std::vector<Mat>& adj,
                          const std::vector<char>* keep) const {
    check_mine(out);
    if (!is_scalar(nodes_[out.id].val))
        throw std::invalid_argument("backward: output must be scalar");

    adj.assign(nodes_.size(), Mat());
    adj[out.id] = Mat(1, 1, 1.0);

    auto grab = [&](std::int32_t id) -> Mat& {
        if (adj[id].empty()) adj[id] = Mat(nodes_[id].val.rows(), nodes_[id].val.cols());
        return adj[id];
    };

    for (std::int32_t id = out.id; id >= 0; --id) {
        if (adj[id].empty()) continue;
        const Node& n = nodes_[id];
        const Mat& g = adj[id];
        switch (n.op) {
            case Op::LEAF:
                break;
            case Op::ADD:
                acc_bcast(grab(n.a), g);
                acc_bcast(grab(n.b), g);
                break;
            case Op::SUB:
                acc_bcast(grab(n.a), g);
                acc_bcast(grab(n.b), g, true);
                break;
            case Op::MUL: {
                const Mat &ma = mat(n.a), &mb = mat(n.b);
                Mat ga(g.rows(), g.cols()), gb(g.rows(), g.cols());
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) {
                        ga(i, j) = g(i, j) * at_bcast(mb, i, j);
                        gb(i, j) = g(i, j) * at_bcast(ma, i, j);
                    }
                acc_bcast(grab(n.a), ga);
                acc_bcast(grab(n.b), gb);
                break;
            }
            case Op::DIV: {
                const Mat &ma = mat(n.a), &mb = mat(n.b);
                Mat ga(g.rows(), g.cols()), gb(g.rows(), g.cols());
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) {
                        double bij = at_bcast(mb, i, j);
                        ga(i, j) = g(i, j) / bij;
                        gb(i, j) = -g(i, j) * at_bcast(ma, i, j) / (bij * bij);
                    }
                acc_bcast(grab(n.a), ga);
                acc_bcast(grab(n.b), gb);
                break;
            }
            case Op::MATMUL:
                matmul_nt_acc(g, mat(n.b), grab(n.a));
                matmul_tn_acc(mat(n.a), g, grab(n.b));
                break;
            case Op::ADD_BIAS: {
                acc_bcast(grab(n.a), g);
                Mat& db = grab(n.b);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) db(i, 0) += g(i, j);
                break;
            }
            case Op::TANH: {
                Mat& da = grab(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    double u = n.val.data()[i];
                    da.data()[i] += g.data()[i] * (1.0 - u * u);
                }
                break;
            }
            case Op::SQUARE: {
                const Mat& ma = mat(n.a);
                Mat& da = grab(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    da.data()[i] += 2.0 * g.data()[i] * ma.data()[i];
                break;
            }
            case Op::EXP: {
                Mat& da = grab(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    da.data()[i] += g.data()[i] * n.val.data()[i];
                break;
            }
            case Op::LOG: {
                const Mat& ma = mat(n.a);
                Mat& da = grab(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    da.data()[i] += g.data()[i] / ma.data()[i];
                break;
            }
            case Op::SUM: {
                Mat& da = grab(n.a);
                double gv = g(0, 0);
                for (std::size_t i = 0; i < da.size(); ++i) da.data()[i] += gv;
                break;
            }
            case Op::MEAN: {
                Mat& da = grab(n.a);
                double gv = g(0, 0) / static_cast<double>(da.size());
                for (std::size_t i = 0; i < da.size(); ++i) da.data()[i] += gv;
                break;
            }
            case Op::SOFTMAX_CE: {
                const Mat& z = mat(n.a);
                Mat& dz = grab(n.a);
                double gv = g(0, 0) / static_cast<double>(z.cols());
                for (std::size_t j = 0; j < z.cols(); ++j) {
                    double mx = z(0, j);
                    for (std::size_t i = 1; i < z.rows(); ++i) mx = std::max(mx, z(i, j));
                    double se = 0.0;
                    for (std::size_t i = 0; i < z.rows(); ++i) se += std::exp(z(i, j) - mx);
                    for (std::size_t i = 0; i < z.rows(); ++i) {
                        double p = std::exp(z(i, j) - mx) / se;
                        double ind = (static_cast<std::size_t>(n.labels[j]) == i) ? 1.0 : 0.0;
                        dz(i, j) += gv * (p - ind);
                    }
                }
                break;
            }
        }
        if (keep && !(*keep)[id]) adj[id] = Mat();  // release once consumed
    }
}

std::vector<Mat> Tape::backward(Value out) const {
    std::vector<Mat> adj;
    backward_sweep(out, adj, nullptr);
    return adj;
}

std::vector<Mat> Tape::gradients(Value out, std::span<const Value> wrt) const {
    std::vector<char> keep(nodes_.size(), 0);
    for (Value v : wrt) {
        check_mine(v);
        keep[v.id] = 1;
    }
    std::vector<Mat> adj;
    backward_sweep(out, adj, &keep);
    std::vector<Mat> result;
    result.reserve(wrt.size());
    for (Value v : wrt) {
        if (adj[v.id].empty())
            result.emplace_back(nodes_[v.id].val.rows(), nodes_[v.id].val.cols());
        else
            result.push_back(std::move(adj[v.id]));
    }
    return result;
}

double grad_check(const ScalarBuilder& f, std::span<const double> point, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("grad_check: h must be positive");

    Tape t;
    BuiltScalar built = f(t, point);
    auto adj = t.backward(built.out);

    std::vector<double> ad;
    for (Value v : built.inputs) {
        const Mat& m = t.val(v);
        const Mat& g = adj[v.id];
        for (std::size_t i = 0; i < m.size(); ++i)
            ad.push_back(g.empty() ? 0.0 : g.data()[i]);
    }
    if (ad.size() != point.size())
        throw std::invalid_argument("grad_check: builder input size mismatch");

    double max_err = 0.0;
    std::vector<double> p(point.begin(), point.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + h;
        Tape tp;
        double fp = tp.scalar_val(f(tp, p).out);
        p[i] = saved - h;
        Tape tm;
        double fm = tm.scalar_val(f(tm, p).out);
        p[i] = saved;
        double fd = (fp - fm) / (2.0 * h);
        double err = std::abs(ad[i] - fd) / std::max(1.0, std::abs(ad[i]) + std::abs(fd));
        max_err = std::max(max_err, err);
    }
    return max_err;
}

}  // namespace tanhseed
