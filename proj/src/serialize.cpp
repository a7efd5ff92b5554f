// Decimal parsing with certified displacement bounds and bit-exact JSON
// round trips for balls.

#include "ctheta/serialize.hpp"

#include <mpfr.h>

#include <stdexcept>

namespace ctheta {

Rounded dyadic_from_decimal(const std::string& s, Precision bits) {
    if (bits < 2) throw std::invalid_argument("parse precision must be >= 2");
    mpfr_t v;
    mpfr_init2(v, bits);
    char* end = nullptr;
    int t = mpfr_strtofr(v, s.c_str(), &end, 10, MPFR_RNDN);
    if (end == s.c_str() || *end != '\0' || !mpfr_number_p(v)) {
        mpfr_clear(v);
        throw std::invalid_argument("not a decimal number: '" + s + "'");
    }
    Rounded out;
    if (!mpfr_zero_p(v)) {
        mpz_class m;
        mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), v);
        out.value = Dyadic(m, (long)e);
        // Round-to-nearest at `bits` significant bits: displacement at most
        // half an ulp of the result.
        if (t != 0) out.error = Dyadic::pow2((long)mpfr_get_exp(v) - bits - 1);
    } else if (t != 0) {
        mpfr_clear(v);
        throw std::invalid_argument("decimal underflowed to zero: '" + s + "'");
    }
    mpfr_clear(v);
    return out;
}

ComplexBall ball_from_decimal(const std::string& re, const std::string& im, Precision bits) {
    Rounded r = dyadic_from_decimal(re, bits);
    Rounded i = dyadic_from_decimal(im, bits);
    return ComplexBall(r.value, i.value, rnd::hypot_up(r.error, i.error));
}

nlohmann::json ball_to_json(const ComplexBall& b) {
    return nlohmann::json{{"re", b.re_mid().to_hex()},
                          {"im", b.im_mid().to_hex()},
                          {"rad", b.radius().to_hex()}};
}

ComplexBall ball_from_json(const nlohmann::json& j) {
    return ComplexBall(Dyadic::parse_hex(j.at("re").get<std::string>()),
                       Dyadic::parse_hex(j.at("im").get<std::string>()),
                       Dyadic::parse_hex(j.at("rad").get<std::string>()));
}

nlohmann::json sign_path_to_json(const SignPath& path) {
    nlohmann::json steps = nlohmann::json::array();
    for (const SignStep& st : path.steps) {
        nlohmann::json t = nlohmann::json::array();
        for (const ComplexBall& b : st.t) t.push_back(ball_to_json(b));
        nlohmann::json step{{"t", std::move(t)}};
        if (!st.v.empty()) {
            nlohmann::json v = nlohmann::json::array();
            for (const ComplexBall& b : st.v) v.push_back(ball_to_json(b));
            step["v"] = std::move(v);
        }
        steps.push_back(std::move(step));
    }
    return nlohmann::json{{"steps", std::move(steps)}};
}

SignPath sign_path_from_json(const nlohmann::json& j) {
    SignPath path;
    for (const nlohmann::json& step : j.at("steps")) {
        SignStep st;
        for (const nlohmann::json& b : step.at("t")) st.t.push_back(ball_from_json(b));
        if (step.contains("v")) {
            for (const nlohmann::json& b : step.at("v")) st.v.push_back(ball_from_json(b));
        }
        path.steps.push_back(std::move(st));
    }
    return path;
}

}  // namespace ctheta
