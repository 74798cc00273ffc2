#include "fanbeam/json_io.hpp"

#include <fstream>

#include "fanbeam/error.hpp"

namespace fanbeam {

namespace {

template <class T>
void optional_field(const Json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

const Json& required(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorKind::Format, std::string("missing field '") + key + "'");
    return *it;
}

} // namespace

void to_json(Json& j, const FanbeamGeometry& g) {
    j = Json{{"d_source", g.d_source},     {"d_detector", g.d_detector}, {"n_detector", g.n_detector},
             {"s_detector", g.s_detector}, {"n_angle", g.n_angle},       {"angles", g.angles},
             {"image_size", g.image_size}};
}

void from_json(const Json& j, FanbeamGeometry& g) {
    required(j, "d_source").get_to(g.d_source);
    required(j, "d_detector").get_to(g.d_detector);
    required(j, "n_detector").get_to(g.n_detector);
    required(j, "s_detector").get_to(g.s_detector);
    required(j, "angles").get_to(g.angles);
    required(j, "image_size").get_to(g.image_size);
    g.n_angle = static_cast<int>(g.angles.size());
    optional_field(j, "n_angle", g.n_angle);
}

void to_json(Json& j, const CalibParams& p) {
    j = Json{{"s_fwd", p.s_fwd}, {"d_source", p.d_source}, {"angles", p.angles}};
}

void from_json(const Json& j, CalibParams& p) {
    required(j, "s_fwd").get_to(p.s_fwd);
    required(j, "d_source").get_to(p.d_source);
    required(j, "angles").get_to(p.angles);
}

void to_json(Json& j, const FbpConfig& c) {
    j = Json{{"s_fbp", c.s_fbp}, {"filter", std::string(to_string(c.filter))}, {"padding", c.padding}};
}

void from_json(const Json& j, FbpConfig& c) {
    optional_field(j, "s_fbp", c.s_fbp);
    if (auto it = j.find("filter"); it != j.end()) c.filter = filter_from_string(it->get<std::string>());
    optional_field(j, "padding", c.padding);
}

void to_json(Json& j, const CoordinateDescentConfig& c) {
    Json order = Json::array();
    for (auto b : c.block_order) order.push_back(std::string(to_string(b)));
    j = Json{{"lr_sfwd", c.lr_sfwd},
             {"lr_dsource", c.lr_dsource},
             {"lr_angle", c.lr_angle},
             {"max_outer_iters", c.max_outer_iters},
             {"tol", c.tol},
             {"loss_floor", c.loss_floor},
             {"block_order", order},
             {"sfwd_closed_form", c.sfwd_closed_form},
             {"lr_growth", c.lr_growth},
             {"secant_rates", c.secant_rates},
             {"max_halvings", c.max_halvings},
             {"subsample", c.subsample},
             {"seed", c.seed},
             {"step", c.projector.step}};
}

void from_json(const Json& j, CoordinateDescentConfig& c) {
    optional_field(j, "lr_sfwd", c.lr_sfwd);
    optional_field(j, "lr_dsource", c.lr_dsource);
    optional_field(j, "lr_angle", c.lr_angle);
    optional_field(j, "max_outer_iters", c.max_outer_iters);
    optional_field(j, "tol", c.tol);
    optional_field(j, "loss_floor", c.loss_floor);
    if (auto it = j.find("block_order"); it != j.end()) {
        c.block_order.clear();
        for (const auto& b : *it) c.block_order.push_back(block_from_string(b.get<std::string>()));
    }
    optional_field(j, "sfwd_closed_form", c.sfwd_closed_form);
    optional_field(j, "lr_growth", c.lr_growth);
    optional_field(j, "secant_rates", c.secant_rates);
    optional_field(j, "max_halvings", c.max_halvings);
    optional_field(j, "subsample", c.subsample);
    optional_field(j, "seed", c.seed);
    optional_field(j, "step", c.projector.step);
}

void to_json(Json& j, const EnhancerSpec& e) {
    j = Json{{"type", std::string(to_string(e.kind))}};
    if (e.kind == EnhancerKind::GaussianSmooth) j["sigma"] = e.sigma;
}

void from_json(const Json& j, EnhancerSpec& e) {
    if (j.is_string()) {
        e.kind = enhancer_from_string(j.get<std::string>());
        return;
    }
    e.kind = enhancer_from_string(required(j, "type").get<std::string>());
    optional_field(j, "sigma", e.sigma);
}

void to_json(Json& j, const ReconConfig& c) {
    j = Json{{"lambdas", c.lambdas}, {"enhancer", c.enhancer}, {"use_bias_correction", c.use_bias_correction}};
}

void from_json(const Json& j, ReconConfig& c) {
    optional_field(j, "lambdas", c.lambdas);
    optional_field(j, "enhancer", c.enhancer);
    optional_field(j, "use_bias_correction", c.use_bias_correction);
}

void to_json(Json& j, const Ellipse& e) {
    j = Json{{"center", e.center}, {"semi_axes", e.semi_axes}, {"rotation", e.rotation}, {"density", e.density}};
}

void from_json(const Json& j, Ellipse& e) {
    required(j, "center").get_to(e.center);
    required(j, "semi_axes").get_to(e.semi_axes);
    optional_field(j, "rotation", e.rotation);
    optional_field(j, "density", e.density);
}

void to_json(Json& j, const EllipsePhantom& p) { j = Json{{"ellipses", p.ellipses}}; }

void from_json(const Json& j, EllipsePhantom& p) {
    // A bare list of ellipse records is accepted too.
    if (j.is_array()) j.get_to(p.ellipses);
    else required(j, "ellipses").get_to(p.ellipses);
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Format, path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    out.close();
    require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path.string());
}

} // namespace fanbeam
