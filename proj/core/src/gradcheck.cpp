#include "ctsynth/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ctsynth {

namespace {
double eval_loss(const LossBuilder& build) {
    Tape<double> tape;
    Node<double>* loss = build(tape);
    if (loss->value.numel() != 1)
        throw error(errc::shape_mismatch, "grad_check loss must be scalar");
    return loss->value.data[0];
}
} // namespace

GradCheckReport grad_check(const LossBuilder& build, std::vector<Parameter<double>*> params,
                           double h, double denom_floor) {
    for (auto* p : params) p->zero_grad();
    {
        Tape<double> tape;
        Node<double>* loss = build(tape);
        tape.backward(loss);
    }

    GradCheckReport report;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.data.size(); ++i) {
            const double saved = p->value.data[i];
            p->value.data[i] = saved + h;
            const double fp = eval_loss(build);
            p->value.data[i] = saved - h;
            const double fm = eval_loss(build);
            p->value.data[i] = saved;

            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = p->grad.data[i];
            const double denom =
                std::max({std::fabs(analytic), std::fabs(numeric), denom_floor});
            const double rel = std::fabs(analytic - numeric) / denom;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = p->name;
                report.worst_index = static_cast<std::int64_t>(i);
            }
        }
    }
    return report;
}

} // namespace ctsynth
