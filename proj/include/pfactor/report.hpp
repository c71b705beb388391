#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfactor/interpolation.hpp"
#include "pfactor/kkt.hpp"
#include "pfactor/optimality.hpp"

namespace pfactor::report {

using nlohmann::json;

/// Non-finite values serialize as null.
json number(double v);
json vector(const Vector& v);
json matrix(const Matrix& m);  // array of rows

json cascade(const SubspaceCascade& c);
json factor_operator(const FactorOperator& op);
json verdict(const RegularityVerdict& v);
json trace_summary(const IterationTrace& t);
json certificate(const ExistenceCertificate& c);
json optimality(const PFactorLagrangeReport& r);
json cone(const TangentConeQuery& q);
json index_sets(const IndexSets& s);
json kkt(const KKTResult& r);

/// Header `iter,x1,...,xn,residual,p_residual,step_norm,sigma_min`; values in %.17g,
/// non-finite values written as nan/inf.
void write_trace_csv(std::ostream& out, const IterationTrace& t);

/// Header `eps,classical_error,pfactor_error`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

std::string trace_csv_header(int n);

}  // namespace pfactor::report
