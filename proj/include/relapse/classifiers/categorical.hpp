#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace relapse {

/// Row-major matrix of category codes in [0, levels).
class CategoricalMatrix {
public:
    CategoricalMatrix() = default;
    CategoricalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    static CategoricalMatrix from_rows(const std::vector<std::vector<int>>& rows) {
        CategoricalMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) {
                throw std::invalid_argument("CategoricalMatrix: ragged rows");
            }
            std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    int& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    int at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const int> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<int> column(std::size_t c) const {
        std::vector<int> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            out[r] = at(r, c);
        }
        return out;
    }

    CategoricalMatrix select_rows(std::span<const std::size_t> rows) const {
        CategoricalMatrix out(rows.size(), cols_);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto src = row(rows[i]);
            std::copy(src.begin(), src.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
        }
        return out;
    }

    CategoricalMatrix select_cols(std::span<const std::size_t> cols) const {
        CategoricalMatrix out(rows_, cols.size());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                out.at(r, j) = at(r, cols[j]);
            }
        }
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<int> data_;
};

/// Binary labels: 1 = relapse, 0 = non-relapse.
using Labels = std::vector<int>;

/// Thrown when a fit needs both classes and gets one.
class SingleClassError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ClassCounts {
    std::size_t negative = 0;
    std::size_t positive = 0;
};

inline ClassCounts count_classes(std::span<const int> y) {
    ClassCounts c;
    for (int v : y) {
        (v ? c.positive : c.negative)++;
    }
    return c;
}

inline void require_both_classes(std::span<const int> y, const char* who) {
    const auto c = count_classes(y);
    if (c.positive == 0 || c.negative == 0) {
        throw SingleClassError(std::string(who) + ": training labels contain a single class");
    }
}

/// Prediction for one row: hard label and relapse score in [0, 1].
struct Prediction {
    int label = 0;
    double score = 0.0;
};

} // namespace relapse
