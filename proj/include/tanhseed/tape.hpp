#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tanhseed/mat.hpp"

namespace tanhseed {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as the tape
// lives and is not cleared.
struct Value {
    Tape* tape = nullptr;
    std::int32_t id = -1;
};

enum class Op : std::uint8_t {
    LEAF,
    ADD,       // elementwise; either side may be 1x1 (scalar broadcast)
    SUB,
    MUL,
    DIV,
    MATMUL,
    ADD_BIAS,  // (n x m) + (n x 1) broadcast over columns
    TANH,
    SQUARE,
    EXP,
    LOG,
    SUM,       // scalar: sum of all entries
    MEAN,      // scalar: mean of all entries
    SOFTMAX_CE,  // scalar: mean cross-entropy of softmax over rows, per column
};

// Record of one computed value. Parents a/b index earlier nodes; labels is
// only populated for SOFTMAX_CE.
struct Node {
    Op op = Op::LEAF;
    std::int32_t a = -1, b = -1;
    Mat val;
    std::vector<int> labels;
};

// Append-only computation record over dense matrices. Each operation
// validates shapes eagerly and stores its result, so the forward value of
// any node is available immediately; backward() replays the record in
// reverse to accumulate adjoints. The tape owns all storage; Values are
// indices into it.
class Tape {
public:
    Value leaf(Mat m);
    Value scalar(double v);

    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);
    Value div(Value a, Value b);
    Value matmul(Value a, Value b);
    Value add_bias(Value a, Value bias);
    Value tanh(Value a);
    Value square(Value a);
    Value exp(Value a);
    Value log(Value a);
    Value sum(Value a);
    Value mean(Value a);
    // Mean over columns of (logsumexp(column) - logit[label]). logits are
    // (classes x batch); labels[j] picks the true row of column j.
    Value softmax_ce(Value logits, std::span<const int> labels);

    const Mat& val(Value v) const;
    double scalar_val(Value v) const;  // value of a 1x1 node

    // Full adjoint map for a scalar output: entry i is d(out)/d(node i).
    // Nodes outside the dependency cone get an empty Mat.
    std::vector<Mat> backward(Value out) const;

    // Adjoints of just the listed nodes. Same sweep as backward() but
    // intermediate adjoints are released once consumed, which keeps the
    // peak footprint near the widest live frontier instead of the whole
    // tape. Use this for training-sized graphs.
    std::vector<Mat> gradients(Value out, std::span<const Value> wrt) const;

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    Value push(Node n);
    void check_mine(Value v) const;
    const Mat& mat(std::int32_t id) const { return nodes_[id].val; }
    void backward_sweep(Value out, std::vector<Mat>& adj,
                        const std::vector<char>* keep) const;

    std::vector<Node> nodes_;
};

inline Value operator+(Value a, Value b) { return a.tape->add(a, b); }
inline Value operator-(Value a, Value b) { return a.tape->sub(a, b); }
inline Value operator*(Value a, Value b) { return a.tape->mul(a, b); }
inline Value operator/(Value a, Value b) { return a.tape->div(a, b); }

// Scalar-valued graph builder for gradient checking: given a tape and a
// flat parameter vector, constructs leaves from those numbers (in a fixed
// pack order), builds a scalar output, and reports both.
struct BuiltScalar {
    Value out;
    std::vector<Value> inputs;  // leaves, in pack order
};
using ScalarBuilder = std::function<BuiltScalar(Tape&, std::span<const double>)>;

// Compares reverse-mode gradients of f against central finite differences
// at the given point. Returns the max entrywise error, relative for
// magnitudes above 1 and absolute below.
double grad_check(const ScalarBuilder& f, std::span<const double> point, double h = 1e-5);

}  // namespace tanhseed
