#pragma once

#include <string>

#include "uavsat/labels.hpp"
#include "uavsat/raster.hpp"

namespace uavsat {

// Two geographically aligned patches from different survey dates plus their
// label sets. Both patches cover the same ground window at the same gsd.
struct PatchPair {
    Raster patch_a;
    Raster patch_b;
    LabelSet labels_a;
    LabelSet labels_b;
    std::string geo_id;
    std::string survey_a;
    std::string survey_b;

    void validate(bool allow_self_pair = false) const {
        require(patch_a.same_shape(patch_b), "patch pair dimensions mismatch");
        require(patch_a.gsd() == patch_b.gsd(), "patch pair gsd mismatch");
        if (!allow_self_pair) {
            require(survey_a != survey_b, "self-pair not permitted");
        }
    }
};

}  // namespace uavsat
