#ifndef NNREACH_INTERVAL_HPP
#define NNREACH_INTERVAL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nnreach {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

namespace detail {

inline void require_same_size(Eigen::Index a, Eigen::Index b, const char* what)
{
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw std::invalid_argument(os.str());
    }
}

} // namespace detail

/// Axis-aligned box [lower, upper]. The constructor rejects lower > upper.
template <typename Scalar>
class Box
{
public:
    Box() = default;

    Box(Vector<Scalar> lower, Vector<Scalar> upper)
        : lower_(std::move(lower)), upper_(std::move(upper))
    {
        detail::require_same_size(lower_.size(), upper_.size(), "Box");
        for (Eigen::Index i = 0; i < lower_.size(); ++i) {
            if (!(lower_(i) <= upper_(i))) {
                std::ostringstream os;
                os << "Box: lower > upper in coordinate " << i << " (" << lower_(i) << " > "
                   << upper_(i) << ")";
                throw std::invalid_argument(os.str());
            }
        }
    }

    static Box point(const Vector<Scalar>& z) { return Box(z, z); }

    Eigen::Index size() const { return lower_.size(); }
    const Vector<Scalar>& lower() const { return lower_; }
    const Vector<Scalar>& upper() const { return upper_; }

    Vector<Scalar> width() const { return upper_ - lower_; }
    Scalar width(Eigen::Index i) const { return upper_(i) - lower_(i); }
    Vector<Scalar> center() const { return (lower_ + upper_) / Scalar(2); }

    /// Product of widths.
    Scalar volume() const { return width().prod(); }

    bool contains(const Vector<Scalar>& z) const
    {
        detail::require_same_size(size(), z.size(), "Box::contains");
        return (lower_.array() <= z.array()).all() && (z.array() <= upper_.array()).all();
    }

    friend bool operator==(const Box& a, const Box& b)
    {
        return a.lower_ == b.lower_ && a.upper_ == b.upper_;
    }

private:
    Vector<Scalar> lower_;
    Vector<Scalar> upper_;
};

using BoxXd = Box<double>;

/// Stacked pair (x, xhat) in R^{2n}. Carries no ordering invariant of its own.
template <typename Scalar>
struct EmbeddingState
{
    Vector<Scalar> x;
    Vector<Scalar> xhat;

    Eigen::Index size() const { return x.size(); }

    Vector<Scalar> stacked() const
    {
        Vector<Scalar> s(2 * x.size());
        s << x, xhat;
        return s;
    }

    static EmbeddingState from_stacked(const Vector<Scalar>& s)
    {
        if (s.size() % 2 != 0)
            throw std::invalid_argument("EmbeddingState: stacked vector has odd length");
        const Eigen::Index n = s.size() / 2;
        return {s.head(n), s.tail(n)};
    }

    static EmbeddingState from_box(const Box<Scalar>& b) { return {b.lower(), b.upper()}; }
};

template <typename Scalar>
struct SignedMatrixSplit
{
    Matrix<Scalar> plus;
    Matrix<Scalar> minus;
};

template <typename Scalar>
struct MetzlerSplit
{
    Matrix<Scalar> mzl;
    Matrix<Scalar> nonmzl;
};

/// Entrywise [M]^+ = max(M, 0) and [M]^- = min(M, 0). Zero entries go to plus.
template <typename Derived>
SignedMatrixSplit<typename Derived::Scalar> signed_split(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    SignedMatrixSplit<Scalar> s{Matrix<Scalar>::Zero(m.rows(), m.cols()),
                                Matrix<Scalar>::Zero(m.rows(), m.cols())};
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const Scalar v = m(i, j);
            if (v >= Scalar(0))
                s.plus(i, j) = v;
            else
                s.minus(i, j) = v;
        }
    return s;
}

/// Metzler part keeps the whole diagonal and the nonnegative off-diagonal
/// entries; the remainder holds the negative off-diagonal entries.
template <typename Derived>
MetzlerSplit<typename Derived::Scalar> metzler_split(const Eigen::MatrixBase<Derived>& a)
{
    using Scalar = typename Derived::Scalar;
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << "metzler_split: matrix must be square, got " << a.rows() << "x" << a.cols();
        throw std::invalid_argument(os.str());
    }
    MetzlerSplit<Scalar> s{Matrix<Scalar>::Zero(a.rows(), a.cols()),
                           Matrix<Scalar>::Zero(a.rows(), a.cols())};
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const Scalar v = a(i, j);
            if (i == j || v >= Scalar(0))
                s.mzl(i, j) = v;
            else
                s.nonmzl(i, j) = v;
        }
    return s;
}

/// v with coordinate i taken from w.
template <typename DerivedV, typename DerivedW>
Vector<typename DerivedV::Scalar> replace_coord(const Eigen::MatrixBase<DerivedV>& v, Eigen::Index i,
                                                const Eigen::MatrixBase<DerivedW>& w)
{
    detail::require_same_size(v.size(), w.size(), "replace_coord");
    if (i < 0 || i >= v.size()) {
        std::ostringstream os;
        os << "replace_coord: index " << i << " out of range for dimension " << v.size();
        throw std::out_of_range(os.str());
    }
    Vector<typename DerivedV::Scalar> out = v;
    out(i) = w(i);
    return out;
}

/// Southeast order: a <=_SE b iff a.x <= b.x and b.xhat <= a.xhat.
template <typename Scalar>
bool se_leq(const EmbeddingState<Scalar>& a, const EmbeddingState<Scalar>& b)
{
    detail::require_same_size(a.x.size(), b.x.size(), "se_leq");
    detail::require_same_size(a.xhat.size(), b.xhat.size(), "se_leq");
    detail::require_same_size(a.x.size(), a.xhat.size(), "se_leq");
    return (a.x.array() <= b.x.array()).all() && (b.xhat.array() <= a.xhat.array()).all();
}

template <typename Scalar>
bool box_contains(const Box<Scalar>& outer, const Box<Scalar>& inner)
{
    detail::require_same_size(outer.size(), inner.size(), "box_contains");
    return se_leq(EmbeddingState<Scalar>::from_box(outer), EmbeddingState<Scalar>::from_box(inner));
}

/// Containment up to an absolute slack on every face.
template <typename Scalar>
bool box_contains(const Box<Scalar>& outer, const Box<Scalar>& inner, Scalar slack)
{
    detail::require_same_size(outer.size(), inner.size(), "box_contains");
    return ((outer.lower().array() - slack) <= inner.lower().array()).all() &&
           (inner.upper().array() <= (outer.upper().array() + slack)).all();
}

/// Smallest box containing all boxes in the list.
template <typename Scalar>
Box<Scalar> hull(std::span<const Box<Scalar>> boxes)
{
    if (boxes.empty())
        throw std::invalid_argument("hull: empty box list");
    Vector<Scalar> lo = boxes.front().lower();
    Vector<Scalar> hi = boxes.front().upper();
    for (const auto& b : boxes.subspan(1)) {
        detail::require_same_size(lo.size(), b.size(), "hull");
        lo = lo.cwiseMin(b.lower());
        hi = hi.cwiseMax(b.upper());
    }
    return Box<Scalar>(std::move(lo), std::move(hi));
}

template <typename Scalar>
Box<Scalar> hull(const std::vector<Box<Scalar>>& boxes)
{
    return hull(std::span<const Box<Scalar>>(boxes));
}

} // namespace nnreach

#endif
