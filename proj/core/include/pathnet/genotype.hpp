#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pathnet {

struct Architecture;

/// Per-layer sets of active module indices. Gene sets are kept sorted
/// ascending so that equal paths compare equal and every random draw that
/// walks a genotype is order-stable.
class Genotype {
public:
    Genotype() = default;
    explicit Genotype(std::vector<std::vector<int>> genes);

    std::size_t num_layers() const noexcept { return genes_.size(); }
    const std::vector<int>& layer(std::size_t l) const { return genes_[l]; }
    const std::vector<std::vector<int>>& genes() const noexcept { return genes_; }

    /// Replace one layer's gene set (re-sorted, distinctness re-checked).
    void set_layer(std::size_t l, std::vector<int> genes);

    /// Throws std::invalid_argument if any layer is empty, exceeds the
    /// width bound, or indexes outside [0, M).
    void validate_for(const Architecture& arch) const;

    /// Canonical text form, e.g. "0:3,7|1:2|2:5,19".
    std::string to_text() const;
    static Genotype from_text(const std::string& text);

    bool operator==(const Genotype&) const = default;

private:
    std::vector<std::vector<int>> genes_;
};

}  // namespace pathnet
