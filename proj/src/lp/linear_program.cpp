#include "cfd/lp/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace cfd::lp {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration-limit";
        case Status::NodeLimit: return "node-limit";
    }
    return "?";
}

int LinearProgram::add_variable(double lower, double upper, double cost, std::string name) {
    vars_.push_back({lower, upper, cost, std::move(name)});
    return static_cast<int>(vars_.size() - 1);
}

int LinearProgram::add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    for (const Term& t : terms) {
        if (!merged.empty() && merged.back().var == t.var) {
            merged.back().coef += t.coef;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    rows_.push_back({std::move(merged), sense, rhs, std::move(name)});
    return static_cast<int>(rows_.size() - 1);
}

void LinearProgram::set_cost(int var, double cost) { vars_.at(static_cast<std::size_t>(var)).cost = cost; }

void LinearProgram::set_bounds(int var, double lower, double upper) {
    auto& v = vars_.at(static_cast<std::size_t>(var));
    v.lower = lower;
    v.upper = upper;
}

double LinearProgram::objective(std::span<const double> x) const {
    double z = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) z += vars_[j].cost * x[j];
    return z;
}

double LinearProgram::max_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) {
        worst = std::max({worst, vars_[j].lower - x[j], x[j] - vars_[j].upper});
    }
    for (const Constraint& c : rows_) {
        double a = 0.0;
        for (const Term& t : c.terms) a += t.coef * x[static_cast<std::size_t>(t.var)];
        switch (c.sense) {
            case Sense::LessEqual: worst = std::max(worst, a - c.rhs); break;
            case Sense::GreaterEqual: worst = std::max(worst, c.rhs - a); break;
            case Sense::Equal: worst = std::max(worst, std::abs(a - c.rhs)); break;
        }
    }
    return worst;
}

void LinearProgram::validate() const {
    for (std::size_t j = 0; j < vars_.size(); ++j) {
        const Variable& v = vars_[j];
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper || v.lower == kInf ||
            v.upper == -kInf) {
            throw std::invalid_argument(fmt::format("variable {} has invalid bounds [{}, {}]", j, v.lower, v.upper));
        }
        if (!std::isfinite(v.cost)) throw std::invalid_argument(fmt::format("variable {} has a non-finite cost", j));
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const Constraint& c = rows_[i];
        if (!std::isfinite(c.rhs)) throw std::invalid_argument(fmt::format("row {} has a non-finite rhs", i));
        for (const Term& t : c.terms) {
            if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size()) {
                throw std::invalid_argument(fmt::format("row {} references unknown variable {}", i, t.var));
            }
            if (!std::isfinite(t.coef)) throw std::invalid_argument(fmt::format("row {} has a non-finite coefficient", i));
        }
    }
}

namespace {

std::string var_name(const LinearProgram& p, int j) {
    const auto& n = p.variable(j).name;
    return n.empty() ? fmt::format("x{}", j) : n;
}

void append_terms(std::string& out, const LinearProgram& p, const std::vector<Term>& terms) {
    if (terms.empty()) {
        out += " 0 " + var_name(p, 0);
        return;
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const Term& t = terms[k];
        if (k == 0) {
            out += fmt::format(" {}{} {}", t.coef < 0 ? "-" : "", std::abs(t.coef), var_name(p, t.var));
        } else {
            out += fmt::format(" {} {} {}", t.coef < 0 ? "-" : "+", std::abs(t.coef), var_name(p, t.var));
        }
    }
}

}  // namespace

std::string to_lp_format(const LinearProgram& p) {
    std::string out = "\\ cfdsynth linear program\nMinimize\n obj:";
    std::vector<Term> obj;
    for (std::size_t j = 0; j < p.num_variables(); ++j) {
        if (p.variable(static_cast<int>(j)).cost != 0.0) obj.push_back({static_cast<int>(j), p.variable(static_cast<int>(j)).cost});
    }
    if (p.num_variables() > 0) append_terms(out, p, obj);
    out += "\nSubject To\n";
    for (std::size_t i = 0; i < p.num_constraints(); ++i) {
        const Constraint& c = p.constraint(static_cast<int>(i));
        out += c.name.empty() ? fmt::format(" r{}:", i) : fmt::format(" {}:", c.name);
        append_terms(out, p, c.terms);
        const char* op = c.sense == Sense::LessEqual ? "<=" : c.sense == Sense::GreaterEqual ? ">=" : "=";
        out += fmt::format(" {} {}\n", op, c.rhs);
    }
    out += "Bounds\n";
    for (std::size_t j = 0; j < p.num_variables(); ++j) {
        const Variable& v = p.variable(static_cast<int>(j));
        const std::string name = var_name(p, static_cast<int>(j));
        if (v.lower == -kInf && v.upper == kInf) {
            out += fmt::format(" {} free\n", name);
        } else if (v.lower == v.upper) {
            out += fmt::format(" {} = {}\n", name, v.lower);
        } else {
            const std::string lo = v.lower == -kInf ? "-inf" : fmt::format("{}", v.lower);
            const std::string hi = v.upper == kInf ? "+inf" : fmt::format("{}", v.upper);
            out += fmt::format(" {} <= {} <= {}\n", lo, name, hi);
        }
    }
    out += "End\n";
    return out;
}

}  // namespace cfd::lp
