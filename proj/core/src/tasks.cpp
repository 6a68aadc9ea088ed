#include "pathnet/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pathnet {

namespace {

constexpr double kBlobMeanRadius = 3.0;

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

void Dataset::validate() const {
    if (size() < 1) throw std::invalid_argument("dataset \"" + name + "\": empty");
    if (labels.size() != size()) {
        throw std::invalid_argument("dataset \"" + name + "\": " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(size()) + " rows");
    }
    if (num_classes < 1) {
        throw std::invalid_argument("dataset \"" + name + "\": num_classes must be >= 1");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw std::invalid_argument("dataset \"" + name + "\": label " +
                                        std::to_string(labels[i]) + " at row " +
                                        std::to_string(i) + " outside [0, " +
                                        std::to_string(num_classes) + ")");
        }
    }
    if (!all_finite(features)) {
        throw std::invalid_argument("dataset \"" + name + "\": non-finite feature");
    }
}

Dataset make_blobs(std::size_t classes, std::size_t dim, std::size_t per_class, double spread,
                   std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("make_blobs: classes must be >= 2");
    if (per_class < 1) throw std::invalid_argument("make_blobs: per_class must be >= 1");
    if (dim < 1) throw std::invalid_argument("make_blobs: dim must be >= 1");
    if (spread < 0.0) throw std::invalid_argument("make_blobs: spread must be >= 0");

    Rng rng(seed);

    Matrix means(classes, dim);
    for (std::size_t c = 0; c < classes; ++c) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            means(c, j) = rng.normal();
            norm2 += means(c, j) * means(c, j);
        }
        const double scale = kBlobMeanRadius / std::max(std::sqrt(norm2), 1e-12);
        for (std::size_t j = 0; j < dim; ++j) means(c, j) *= scale;
    }

    Dataset ds;
    ds.num_classes = classes;
    ds.features = Matrix(classes * per_class, dim);
    ds.labels.resize(classes * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            ds.labels[row] = static_cast<int>(c);
            for (std::size_t j = 0; j < dim; ++j) {
                ds.features(row, j) = means(c, j) + spread * rng.normal();
            }
        }
    }
    std::ostringstream name;
    name << "blobs(c=" << classes << ",d=" << dim << ",n=" << per_class << ",spread=" << spread
         << ",seed=" << seed << ")";
    ds.name = name.str();
    return ds;
}

namespace {

/// Random orthogonal matrix via modified Gram-Schmidt on a Gaussian matrix,
/// with one re-orthogonalization pass.
Matrix random_orthogonal(std::size_t dim, Rng& rng) {
    Matrix q(dim, dim);
    for (double& v : q.data()) v = rng.normal();

    for (std::size_t c = 0; c < dim; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < c; ++p) {
                double dot = 0.0;
                for (std::size_t r = 0; r < dim; ++r) dot += q(r, c) * q(r, p);
                for (std::size_t r = 0; r < dim; ++r) q(r, c) -= dot * q(r, p);
            }
        }
        double norm2 = 0.0;
        for (std::size_t r = 0; r < dim; ++r) norm2 += q(r, c) * q(r, c);
        const double inv = 1.0 / std::max(std::sqrt(norm2), 1e-30);
        for (std::size_t r = 0; r < dim; ++r) q(r, c) *= inv;
    }
    return q;
}

}  // namespace

Dataset derive_related_task(const Dataset& base, RelatedKind kind, std::uint64_t seed,
                            std::size_t subset_classes) {
    base.validate();
    Rng rng(seed);
    Dataset out;

    switch (kind) {
        case RelatedKind::LabelPermutation: {
            std::vector<std::size_t> perm(base.num_classes);
            std::iota(perm.begin(), perm.end(), 0);
            shuffle_indices(perm, rng);
            out = base;
            for (auto& y : out.labels) y = static_cast<int>(perm[static_cast<std::size_t>(y)]);
            out.name = base.name + "+label-permutation(seed=" + std::to_string(seed) + ")";
            return out;
        }
        case RelatedKind::FixedRotation: {
            // Rotate every disjoint random plane by the same fixed angle, so
            // no sample turns by more than that angle: the derived task is
            // genuinely shifted but keeps most of the base task's feature
            // alignment. A full random orthogonal map would scramble it.
            constexpr double kAngle = 0.5235987755982988;  // pi / 6
            const std::size_t dim = base.dim();
            const Matrix q = random_orthogonal(dim, rng);
            const double c = std::cos(kAngle), s = std::sin(kAngle);
            Matrix block(dim, dim, 0.0);
            std::size_t j = 0;
            for (; j + 1 < dim; j += 2) {
                block(j, j) = c;
                block(j, j + 1) = -s;
                block(j + 1, j) = s;
                block(j + 1, j + 1) = c;
            }
            if (j < dim) block(j, j) = 1.0;  // odd leftover axis stays put
            out = base;
            out.features = matmul(base.features, matmul(matmul(q, block), transpose(q)));
            out.name = base.name + "+fixed-rotation(seed=" + std::to_string(seed) + ")";
            return out;
        }
        case RelatedKind::ClassSubset: {
            std::size_t k = subset_classes;
            if (k == 0) k = std::max<std::size_t>(2, (base.num_classes + 1) / 2);
            if (k < 2) {
                throw std::invalid_argument("derive_related_task: class subset must keep >= 2 "
                                            "classes, got " + std::to_string(k));
            }
            if (k > base.num_classes) {
                throw std::invalid_argument("derive_related_task: subset of " + std::to_string(k) +
                                            " classes from only " +
                                            std::to_string(base.num_classes));
            }
            std::vector<std::size_t> order(base.num_classes);
            std::iota(order.begin(), order.end(), 0);
            shuffle_indices(order, rng);
            std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<long>(k));
            std::sort(chosen.begin(), chosen.end());
            std::vector<int> remap(base.num_classes, -1);
            for (std::size_t i = 0; i < chosen.size(); ++i) remap[chosen[i]] = static_cast<int>(i);

            std::vector<std::size_t> rows;
            for (std::size_t r = 0; r < base.size(); ++r) {
                if (remap[static_cast<std::size_t>(base.labels[r])] >= 0) rows.push_back(r);
            }
            if (rows.empty()) {
                throw std::invalid_argument("derive_related_task: subset selected no samples");
            }
            out.num_classes = k;
            out.features = Matrix(rows.size(), base.dim());
            out.labels.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t j = 0; j < base.dim(); ++j) {
                    out.features(i, j) = base.features(rows[i], j);
                }
                out.labels[i] = remap[static_cast<std::size_t>(base.labels[rows[i]])];
            }
            out.name = base.name + "+class-subset(k=" + std::to_string(k) +
                       ",seed=" + std::to_string(seed) + ")";
            return out;
        }
    }
    throw std::invalid_argument("derive_related_task: unknown kind");
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double eval_fraction, std::uint64_t seed) {
    ds.validate();
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
        throw std::invalid_argument("split: eval_fraction must be in (0, 1)");
    }
    Rng rng(seed);

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        by_class[static_cast<std::size_t>(ds.labels[r])].push_back(r);
    }

    std::vector<std::size_t> train_rows, eval_rows;
    for (auto& rows : by_class) {
        shuffle_indices(rows, rng);
        const auto n_eval = static_cast<std::size_t>(
            std::llround(eval_fraction * static_cast<double>(rows.size())));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            (i < n_eval ? eval_rows : train_rows).push_back(rows[i]);
        }
    }
    if (eval_rows.empty()) {
        throw std::invalid_argument("split: eval side would be empty at fraction " +
                                    std::to_string(eval_fraction));
    }
    if (train_rows.empty()) {
        throw std::invalid_argument("split: train side would be empty at fraction " +
                                    std::to_string(eval_fraction));
    }
    shuffle_indices(train_rows, rng);
    shuffle_indices(eval_rows, rng);

    auto take = [&ds](const std::vector<std::size_t>& rows, const std::string& suffix) {
        Dataset part;
        part.num_classes = ds.num_classes;
        part.name = ds.name + suffix;
        part.features = Matrix(rows.size(), ds.dim());
        part.labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < ds.dim(); ++j) part.features(i, j) = ds.features(rows[i], j);
            part.labels[i] = ds.labels[rows[i]];
        }
        return part;
    };
    return {take(train_rows, "/train"), take(eval_rows, "/eval")};
}

EpochSampler::EpochSampler(const Dataset& ds, std::size_t batch_size, Rng& rng)
    : ds_(&ds), batch_size_(batch_size), rng_(&rng) {
    if (batch_size < 1) throw std::invalid_argument("batch_stream: batch_size must be >= 1");
    if (batch_size > ds.size()) {
        throw std::invalid_argument("batch_stream: batch_size " + std::to_string(batch_size) +
                                    " exceeds dataset size " + std::to_string(ds.size()));
    }
    order_.resize(ds.size());
    std::iota(order_.begin(), order_.end(), 0);
    pos_ = order_.size();  // next() before start_epoch() yields nothing
}

void EpochSampler::start_epoch() {
    shuffle_indices(order_, *rng_);
    pos_ = 0;
}

bool EpochSampler::next(Matrix& x, std::vector<int>& labels) {
    if (pos_ + batch_size_ > order_.size()) return false;  // short tail dropped
    x = Matrix(batch_size_, ds_->dim());
    labels.resize(batch_size_);
    for (std::size_t i = 0; i < batch_size_; ++i) {
        const std::size_t r = order_[pos_ + i];
        for (std::size_t j = 0; j < ds_->dim(); ++j) x(i, j) = ds_->features(r, j);
        labels[i] = ds_->labels[r];
    }
    pos_ += batch_size_;
    return true;
}

Dataset load_csv(const std::string& path, std::size_t label_column, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open \"" + path + "\"");

    Dataset ds;
    std::vector<double> values;
    std::size_t cols = 0;
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (has_header && !skipped_header) {
            skipped_header = true;
            continue;
        }
        if (line.empty()) continue;

        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) {
                    ++used;
                }
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("load_csv: non-numeric cell \"" + cell + "\" at row " +
                                         std::to_string(line_no));
            }
        }
        if (cols == 0) {
            cols = row.size();
            if (cols < 2) {
                throw std::runtime_error("load_csv: row " + std::to_string(line_no) +
                                         " has fewer than 2 columns");
            }
            if (label_column >= cols) {
                throw std::runtime_error("load_csv: label column " + std::to_string(label_column) +
                                         " outside row of " + std::to_string(cols) + " columns");
            }
        } else if (row.size() != cols) {
            throw std::runtime_error("load_csv: ragged row " + std::to_string(line_no) + " has " +
                                     std::to_string(row.size()) + " cells, expected " +
                                     std::to_string(cols));
        }

        const double label_value = row[label_column];
        const int label = static_cast<int>(std::llround(label_value));
        if (label < 0 || static_cast<double>(label) != label_value) {
            throw std::runtime_error("load_csv: label " + std::to_string(label_value) +
                                     " at row " + std::to_string(line_no) +
                                     " is not a small nonnegative integer");
        }
        ds.labels.push_back(label);
        for (std::size_t j = 0; j < cols; ++j) {
            if (j != label_column) values.push_back(row[j]);
        }
    }
    if (ds.labels.empty()) throw std::runtime_error("load_csv: \"" + path + "\" has no data rows");

    const std::size_t d = cols - 1;
    ds.features = Matrix(ds.labels.size(), d);
    std::copy(values.begin(), values.end(), ds.features.data().begin());
    ds.num_classes = static_cast<std::size_t>(*std::max_element(ds.labels.begin(),
                                                                ds.labels.end())) + 1;
    ds.name = path;
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open \"" + path + "\" for writing");
    char buf[64];
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(r, j));
            out << buf << ',';
        }
        out << ds.labels[r] << '\n';
    }
    if (!out) throw std::runtime_error("save_csv: write to \"" + path + "\" failed");
}

TaskSpec make_task(std::string task_id, const Dataset& full, double eval_fraction,
                   std::uint64_t seed, std::string provenance) {
    TaskSpec task;
    task.task_id = std::move(task_id);
    auto [train, eval] = split(full, eval_fraction, seed);
    task.train = std::move(train);
    task.eval = std::move(eval);
    task.provenance = provenance.empty() ? full.name : std::move(provenance);
    return task;
}

}  // namespace pathnet
