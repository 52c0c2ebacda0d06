#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jgeo/exppoly.hpp"
#include "jgeo/multivec.hpp"

namespace jgeo {

// Outcome of a structural verification: overall pass flag plus the labelled
// residuals (canonical text) of every check that failed.
struct Verdict {
    bool pass = true;
    std::vector<std::pair<std::string, std::string>> residuals;

    void check(const std::string& label, bool ok, const std::string& detail = "") {
        if (!ok) {
            pass = false;
            residuals.emplace_back(label, detail.empty() ? std::string("failed") : detail);
        }
    }

    void check_zero(const std::string& label, const ExpPoly& r) {
        if (!r.is_zero()) {
            pass = false;
            residuals.emplace_back(label, r.text());
        }
    }

    void check_zero(const std::string& label, const Tensor& r) {
        if (!r.is_zero()) {
            pass = false;
            residuals.emplace_back(label, r.text());
        }
    }

    void merge(const Verdict& other) {
        pass = pass && other.pass;
        residuals.insert(residuals.end(), other.residuals.begin(), other.residuals.end());
    }

    std::string summary() const {
        if (pass) return "pass";
        std::string s = "fail:";
        for (const auto& [label, detail] : residuals) {
            s += "\n  " + label + ": " + detail;
        }
        return s;
    }
};

} // namespace jgeo
