#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pathnet/matrix.hpp"
#include "pathnet/rng.hpp"

namespace pathnet {

/// Labeled vector dataset. Immutable once constructed; freely shared.
struct Dataset {
    Matrix features;          // n x d
    std::vector<int> labels;  // in [0, num_classes)
    std::size_t num_classes = 0;
    std::string name;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t dim() const noexcept { return features.cols(); }
    void validate() const;
};

struct TaskSpec {
    std::string task_id;
    Dataset train;
    Dataset eval;
    std::string provenance;
};

/// Gaussian clusters, one per class, means drawn uniformly on a sphere of
/// radius 3 and per-coordinate noise of the given spread.
Dataset make_blobs(std::size_t classes, std::size_t dim, std::size_t per_class, double spread,
                   std::uint64_t seed);

enum class RelatedKind { LabelPermutation, FixedRotation, ClassSubset };

/// A task sharing structure with the base one: relabeled classes, a rotation
/// of feature space by a fixed angle (30 degrees) in seeded random planes, or
/// a class subset. subset_classes only applies to ClassSubset; 0 picks
/// ceil(C/2), at least 2.
Dataset derive_related_task(const Dataset& base, RelatedKind kind, std::uint64_t seed,
                            std::size_t subset_classes = 0);

/// Stratified split: per class, about eval_fraction of the samples go to
/// the eval side (within one sample). Throws if either side ends up empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double eval_fraction, std::uint64_t seed);

/// Mini-batch iterator: one seeded shuffle per epoch, batches taken without
/// replacement, final short batch dropped.
class EpochSampler {
public:
    EpochSampler(const Dataset& ds, std::size_t batch_size, Rng& rng);

    void start_epoch();
    bool next(Matrix& x, std::vector<int>& labels);
    std::size_t batches_per_epoch() const noexcept { return order_.size() / batch_size_; }

private:
    const Dataset* ds_;
    std::size_t batch_size_;
    Rng* rng_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
};

/// Comma-separated numeric rows, label column by index, optional header
/// row. Ragged rows, non-numeric cells, and negative labels are parse
/// errors naming the offending 1-based row.
Dataset load_csv(const std::string& path, std::size_t label_column, bool has_header = false);

/// Features followed by the label as the last column, 17 significant
/// digits, no header. load_csv(path, dim()) round-trips it.
void save_csv(const Dataset& ds, const std::string& path);

TaskSpec make_task(std::string task_id, const Dataset& full, double eval_fraction,
                   std::uint64_t seed, std::string provenance = "");

}  // namespace pathnet
