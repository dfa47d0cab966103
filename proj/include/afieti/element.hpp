#pragma once

#include "afieti/bspline.hpp"
#include "afieti/geometry.hpp"
#include "afieti/kron.hpp"

#include <functional>
#include <vector>

namespace afieti {

/// Everything one element contributes at its tensor Gauss points.
struct ElementData {
    int dim = 0;
    std::vector<Index> element;                  ///< element multi-index
    IndexList dofs;                              ///< scalar indices of the (p+1)^d active functions
    std::vector<std::vector<Index>> local_multi; ///< multi-index of each active function
    Matrix phi;                                  ///< nloc x npts basis values
    std::vector<Matrix> grad;                    ///< per physical direction r: nloc x npts derivatives
    Vector weight;                               ///< Gauss weight times |det J|
    Matrix x;                                    ///< d x npts physical points
    Vector det;                                  ///< det J (signed)
    std::vector<Matrix> jinv;                    ///< J^{-1} per point
    std::vector<Index> grid_index;               ///< colex index in the global Gauss grid
};

/// Element loop over a patch with per-direction basis tables computed once.
class ElementIterator {
public:
    /// points_per_element <= 0 selects p + 1 per direction.
    explicit ElementIterator(const Patch& patch, int points_per_element = 0);

    void run(const std::function<void(const ElementData&)>& body) const;

    const std::vector<QuadratureRule>& rules() const { return rules_; }
    const MultiIndexMap& grid() const { return grid_; }

private:
    struct DirectionTable {
        std::vector<Index> first;
        std::vector<Matrix> values;  ///< per element: q x (p+1)
        std::vector<Matrix> derivs;
    };

    const Patch& patch_;
    std::vector<QuadratureRule> rules_;
    std::vector<DirectionTable> tables_;
    MultiIndexMap elements_;
    MultiIndexMap grid_;
};

}  // namespace afieti
