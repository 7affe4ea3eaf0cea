#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "covdiff/errors.hpp"

namespace covdiff {

// An n x p sample: rows are observations, columns are variables.
struct DataMatrix {
    Eigen::MatrixXd values;
    std::optional<std::vector<std::string>> column_names;

    int n() const { return static_cast<int>(values.rows()); }
    int p() const { return static_cast<int>(values.cols()); }

    void validate() const {
        if (n() < 2) throw ValidationError("DataMatrix: need at least 2 observations");
        if (p() < 2) throw ValidationError("DataMatrix: need at least 2 variables");
        if (!values.allFinite())
            throw InputError("DataMatrix: non-finite entry (NaN or infinity)");
        if (column_names && static_cast<int>(column_names->size()) != p())
            throw ValidationError("DataMatrix: column_names length does not match p");
    }

    std::string name_of(int k) const {
        if (column_names) return (*column_names)[k];
        return "V" + std::to_string(k + 1);
    }
};

}  // namespace covdiff
