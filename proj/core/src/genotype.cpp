#include "pathnet/genotype.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "pathnet/supernet.hpp"

namespace pathnet {

namespace {

void sort_and_check_distinct(std::vector<int>& genes, std::size_t layer) {
    std::sort(genes.begin(), genes.end());
    if (std::adjacent_find(genes.begin(), genes.end()) != genes.end()) {
        throw std::invalid_argument("genotype: duplicate module index in layer " +
                                    std::to_string(layer));
    }
}

}  // namespace

Genotype::Genotype(std::vector<std::vector<int>> genes) : genes_(std::move(genes)) {
    for (std::size_t l = 0; l < genes_.size(); ++l) sort_and_check_distinct(genes_[l], l);
}

void Genotype::set_layer(std::size_t l, std::vector<int> genes) {
    sort_and_check_distinct(genes, l);
    genes_[l] = std::move(genes);
}

void Genotype::validate_for(const Architecture& arch) const {
    if (genes_.size() != arch.num_layers) {
        throw std::invalid_argument("genotype: has " + std::to_string(genes_.size()) +
                                    " layers, architecture has " +
                                    std::to_string(arch.num_layers));
    }
    for (std::size_t l = 0; l < genes_.size(); ++l) {
        const auto& g = genes_[l];
        if (g.empty()) {
            throw std::invalid_argument("genotype: layer " + std::to_string(l) + " is empty");
        }
        if (g.size() > arch.max_path_width) {
            throw std::invalid_argument("genotype: layer " + std::to_string(l) + " has " +
                                        std::to_string(g.size()) + " modules, max width is " +
                                        std::to_string(arch.max_path_width));
        }
        for (int idx : g) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= arch.modules_per_layer) {
                throw std::invalid_argument("genotype: module index " + std::to_string(idx) +
                                            " in layer " + std::to_string(l) + " outside [0, " +
                                            std::to_string(arch.modules_per_layer) + ")");
            }
        }
    }
}

std::string Genotype::to_text() const {
    std::ostringstream os;
    for (std::size_t l = 0; l < genes_.size(); ++l) {
        if (l) os << '|';
        os << l << ':';
        for (std::size_t i = 0; i < genes_[l].size(); ++i) {
            if (i) os << ',';
            os << genes_[l][i];
        }
    }
    return os.str();
}

Genotype Genotype::from_text(const std::string& text) {
    std::vector<std::vector<int>> genes;
    std::istringstream layers(text);
    std::string layer_part;
    while (std::getline(layers, layer_part, '|')) {
        const auto colon = layer_part.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("genotype text: missing ':' in \"" + layer_part + "\"");
        }
        std::size_t layer_no = 0;
        try {
            layer_no = static_cast<std::size_t>(std::stoul(layer_part.substr(0, colon)));
        } catch (const std::exception&) {
            throw std::invalid_argument("genotype text: bad layer number in \"" + layer_part +
                                        "\"");
        }
        if (layer_no != genes.size()) {
            throw std::invalid_argument("genotype text: expected layer " +
                                        std::to_string(genes.size()) + ", got \"" + layer_part +
                                        "\"");
        }
        std::vector<int> layer_genes;
        std::istringstream items(layer_part.substr(colon + 1));
        std::string item;
        while (std::getline(items, item, ',')) {
            try {
                std::size_t used = 0;
                const int v = std::stoi(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                layer_genes.push_back(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("genotype text: bad module index \"" + item + "\"");
            }
        }
        if (layer_genes.empty()) {
            throw std::invalid_argument("genotype text: layer " + std::to_string(layer_no) +
                                        " has no modules");
        }
        genes.push_back(std::move(layer_genes));
    }
    if (genes.empty()) throw std::invalid_argument("genotype text: empty");
    return Genotype(std::move(genes));
}

}  // namespace pathnet
