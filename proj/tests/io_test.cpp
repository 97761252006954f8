#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gausscone/io.hpp"

using namespace gausscone;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(GAUSSCONE_DATA_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "gausscone_io_test";
    fs::create_directories(dir);
    return dir / name;
}

// Parses `doc` and returns the JSON pointer of the resulting ParseError.
std::string error_pointer(const io::json& doc) {
    try {
        io::instance_from_json(doc);
    } catch (const ParseError& e) {
        return e.pointer();
    }
    return "<no error>";
}

} // namespace

TEST(LoadInstance, SymmetricFile) {
    const auto li = io::load_instance(data("symmetric_two_atom.json"));
    EXPECT_DOUBLE_EQ(li.problem().balance_ratio(), 1.0);
    EXPECT_TRUE(li.warnings.empty());
    EXPECT_EQ(li.problem().mu_size(), 2);
}

TEST(LoadInstance, BoundaryAtomNamesIndex) {
    try {
        io::load_instance(data("boundary_atom.json"));
        FAIL() << "expected DomainViolation";
    } catch (const DomainViolation& e) {
        EXPECT_NE(std::string(e.what()).find("atom 1"), std::string::npos) << e.what();
    }
}

TEST(LoadInstance, UnbalancedWarns) {
    const auto li = io::load_instance(data("unbalanced.json"));
    EXPECT_DOUBLE_EQ(li.problem().balance_ratio(), 2.0);
    ASSERT_EQ(li.warnings.size(), 1u);
    EXPECT_NE(li.warnings[0].find("unbalanced"), std::string::npos);
}

TEST(LoadInstance, ParseErrorsCarryPointers) {
    const auto good = io::read_json(data("symmetric_two_atom.json"));
    auto doc = good;
    doc["mu"]["atoms"][1]["weight"] = "heavy";
    EXPECT_EQ(error_pointer(doc), "/mu/atoms/1/weight");
    doc = good;
    doc["lambda"]["atoms"][0].erase("direction");
    EXPECT_EQ(error_pointer(doc), "/lambda/atoms/0/direction");
    doc = good;
    doc["cone"]["generators"][1] = {0.0, 1.0, 2.0};
    EXPECT_EQ(error_pointer(doc), "/cone/generators/1");
    doc = good;
    doc["mu"]["domain"] = "omega_c_dual";
    EXPECT_EQ(error_pointer(doc), "/mu/domain");
    doc = good;
    doc.erase("lambda");
    EXPECT_EQ(error_pointer(doc), "/lambda");
    doc = good;
    doc["config"] = {{"max_iter", 1.5}};
    EXPECT_EQ(error_pointer(doc), "/config/max_iter");

    const auto bad = scratch("broken.json");
    std::ofstream(bad) << "{\"cone\": ";
    EXPECT_THROW(io::load_instance(bad.string()), ParseError);
    EXPECT_THROW(io::load_instance("/nonexistent/file.json"), IOError);
}

TEST(Generate, BalancedSmallInstanceLoads) {
    const auto inst = generate_instance(2, 3, 3, 1, true);
    const auto path = scratch("gen_a.json");
    io::save_instance(path.string(), inst);
    const auto li = io::load_instance(path.string());
    EXPECT_NEAR(li.problem().balance_ratio(), 1.0, 1e-15);
    EXPECT_NEAR(li.problem().lambda_mass(), 1.0, 1e-15);
}

TEST(Generate, SameSeedByteIdentical) {
    const auto a = scratch("gen_same_a.json"), b = scratch("gen_same_b.json");
    io::save_instance(a.string(), generate_instance(3, 7, 5, 123, true));
    io::save_instance(b.string(), generate_instance(3, 7, 5, 123, true));
    EXPECT_EQ(slurp(a.string()), slurp(b.string()));
    io::save_instance(b.string(), generate_instance(3, 7, 5, 124, true));
    EXPECT_NE(slurp(a.string()), slurp(b.string()));
}

TEST(Generate, LargeInstanceSolves) {
    const auto inst = generate_instance(3, 50, 50, 9, true);
    const auto path = scratch("gen_large.json");
    io::save_instance(path.string(), inst);
    const auto r = solve(io::load_instance(path.string()).problem());
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.residual_linf, 1e-3);
}

TEST(RoundTrip, InstanceIsSemanticallyIdentical) {
    const auto inst = generate_instance(4, 9, 6, 5, false);
    SolveConfig cfg;
    cfg.seed = 3;
    cfg.tol = 1e-8;
    const auto doc = io::to_json(inst, cfg);
    const auto li = io::instance_from_json(doc);
    EXPECT_EQ(io::to_json(li.instance, li.config), doc);
    for (int i = 0; i < inst.mu.size(); ++i) {
        EXPECT_EQ(li.instance.mu.atoms()[i].direction.coords(), inst.mu.atoms()[i].direction.coords());
        EXPECT_EQ(li.instance.mu.atoms()[i].weight, inst.mu.atoms()[i].weight);
    }
    EXPECT_EQ(*li.config->seed, 3u);

    // Through a file as well.
    const auto path = scratch("roundtrip.json");
    io::save_instance(path.string(), inst);
    const auto first = slurp(path.string());
    io::save_instance(path.string(), io::load_instance(path.string()).instance);
    EXPECT_EQ(slurp(path.string()), first);
}

TEST(RoundTrip, PseudoCones) {
    const auto v = io::load_pseudo_cone(data("shifted_quadrant.json"));
    ASSERT_TRUE(v.is_v());
    EXPECT_NEAR(radial_value(*v.v, Direction::normalized({1, 1})), std::sqrt(2.0), 1e-12);
    EXPECT_EQ(io::pseudo_cone_from_json(io::to_json(*v.v)).v->radii(), v.v->radii());

    const auto h = io::load_pseudo_cone(data("diagonal_wulff.json"));
    ASSERT_FALSE(h.is_v());
    EXPECT_NEAR(radial_value(*h.h, Direction::normalized({1, 1})), std::sqrt(2.0), 1e-12);
    const auto back = io::pseudo_cone_from_json(io::to_json(copolar(*h.h)));
    EXPECT_EQ(back.v->radii()[0], 1.0 / h.h->offsets()[0]);

    auto doc = io::to_json(*v.v);
    doc["rep"] = "X";
    try {
        io::pseudo_cone_from_json(doc);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.pointer(), "/rep");
    }
}

TEST(Result, JsonFields) {
    const auto p = io::load_instance(data("symmetric_two_atom.json")).problem();
    const auto r = solve(p);
    const auto doc = io::to_json(r);
    for (const char* key : {"log_radii", "phi", "residual_linf", "iterations", "certified", "balance_ratio"}) {
        EXPECT_TRUE(doc.contains(key)) << key;
    }
    const auto k = io::pseudo_cone_for(doc, p);
    EXPECT_NEAR(k.radii()[0], std::exp(r.log_radii[0]), 0.0);
}

TEST(PlotData, SymmetricResult) {
    const auto p = io::load_instance(data("symmetric_two_atom.json")).problem();
    const auto r = solve(p);
    const auto path = scratch("sym.csv");
    const auto boundary = io::emit_plot_data(r, p, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "index,v0,v1,radius,target_mass,achieved_mass,residual");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const double res = std::stod(line.substr(line.rfind(',') + 1));
        EXPECT_LE(res, 1e-6);
    }
    EXPECT_EQ(rows, 2);
    EXPECT_FALSE(boundary.empty());
}

TEST(PlotData, BoundaryPointsBelongToK) {
    const auto inst = generate_instance(2, 20, 6, 17, true);
    const auto p = inst.problem();
    const auto r = solve(p);
    const auto path = scratch("b.csv");
    const auto boundary = io::emit_plot_data(r, p, path.string(), 100);
    const auto k = p.pseudo_cone(r.log_radii);
    std::ifstream in(boundary);
    std::string line;
    std::getline(in, line);
    int points = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        Vec y(2);
        y << std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1));
        EXPECT_TRUE(contains(k, y, 1e-9));
        ++points;
    }
    EXPECT_GE(points, 100);
}

TEST(PlotData, UnbalancedBookkeeping) {
    const auto li = io::load_instance(data("unbalanced.json"));
    const auto p = li.problem();
    const auto r = solve(p);
    const auto path = scratch("unb.csv");
    io::emit_plot_data(r, p, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    double target = 0.0, achieved = 0.0;
    while (std::getline(in, line)) {
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        target += cols[4];
        achieved += cols[5];
    }
    EXPECT_NEAR(achieved, p.lambda_mass(), 1e-12);
    EXPECT_NEAR(target, p.balance_ratio() * p.mu_mass(), 1e-12);
}
