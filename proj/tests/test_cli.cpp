#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

const std::string kCli = TRAJLAB_CLI_PATH;
const std::string kDir = "/tmp/trajlab_cli_test";

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > " + kDir + "/stdout.txt 2> " +
                            kDir + "/stderr.txt";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace

TEST_CASE("cli pipeline: synth -> corrupt -> reconcile -> aggregate -> waves") {
    REQUIRE(std::system(("mkdir -p " + kDir).c_str()) == 0);

    spill(kDir + "/scenario.json", R"({
        "extent_ft": [0, 3000],
        "duration_s": 1500,
        "lane_count": 3,
        "lane_width_ft": 12,
        "direction": -1,
        "inflow_vps": 0.5,
        "free_flow_speed_ftps": 100,
        "wave": {"amplitude_ftps": 60, "period_s": 180, "speed_ftps": 19.07},
        "seed": 101
    })");
    spill(kDir + "/corruption.json", R"({
        "missing_pole_bands": [[1200, 1500]],
        "noise_sigma_x_ft": 1.0,
        "noise_sigma_y_ft": 0.3,
        "seed": 5
    })");

    SUBCASE("synth produces truth and fragments, deterministically") {
        REQUIRE(run("synth --spec " + kDir + "/scenario.json --corrupt " + kDir +
                    "/corruption.json -o " + kDir + "/truth.json -O " + kDir +
                    "/fragments.json") == 0);
        CHECK(file_exists(kDir + "/truth.json"));
        CHECK(file_exists(kDir + "/fragments.json"));
        CHECK(file_exists(kDir + "/truth.json.run.json"));
        const std::string first = slurp(kDir + "/truth.json");
        REQUIRE(run("synth --spec " + kDir + "/scenario.json -o " + kDir +
                    "/truth2.json") == 0);
        CHECK(slurp(kDir + "/truth2.json") == first);

        REQUIRE(run("validate " + kDir + "/truth.json") == 0);

        REQUIRE(run("reconcile " + kDir + "/fragments.json -o " + kDir +
                    "/reconciled.json --report " + kDir + "/reconcile_report.json") == 0);
        CHECK(file_exists(kDir + "/reconciled.json"));
        const nlohmann::json report =
            nlohmann::json::parse(slurp(kDir + "/reconcile_report.json"));
        CHECK(report["results"]["chains"].size() > 0);

        REQUIRE(run("metrics --pred " + kDir + "/reconciled.json --gt " + kDir +
                    "/truth.json --iou-min 0.1 -o " + kDir + "/metrics.json") == 0);
        const nlohmann::json metrics = nlohmann::json::parse(slurp(kDir + "/metrics.json"));
        CHECK(metrics["tracking"]["mota"].get<double>() > 0.5);

        REQUIRE(run("aggregate " + kDir + "/truth.json --dx 100 --dt 5 -o " + kDir +
                    "/field.csv") == 0);
        REQUIRE(run("waves speed " + kDir + "/field.csv --pairs 16 --seed 7 -o " + kDir +
                    "/wavespeed.json") == 0);
        const nlohmann::json speed = nlohmann::json::parse(slurp(kDir + "/wavespeed.json"));
        CHECK(speed["mean_mph"].get<double>() > 10.0);
        CHECK(speed["mean_mph"].get<double>() < 16.0);

        REQUIRE(run("waves cwt " + kDir + "/field.csv --x 1500 --scales 48 "
                    "--period-min 1 --period-max 10 --window-begin 200 "
                    "--window-end 1300 -o " + kDir + "/scaleogram.csv") == 0);
        CHECK(file_exists(kDir + "/scaleogram.csv"));

        REQUIRE(run("aggregate " + kDir + "/reconciled.json --dx 100 --dt 20 -o " +
                    kDir + "/rec_field.csv") == 0);
        REQUIRE(run("artifacts " + kDir + "/rec_field.csv -o " + kDir + "/bands.json") ==
                0);
        CHECK(file_exists(kDir + "/bands.json"));

        REQUIRE(run("tsdiagram " + kDir + "/truth.json --dx 50 --dt 10 -o " + kDir +
                    "/ts.png --csv " + kDir + "/ts.csv") == 0);
        CHECK(file_exists(kDir + "/ts.png"));
        CHECK(file_exists(kDir + "/ts.csv"));
    }
}

TEST_CASE("cli exit codes and stage interop") {
    REQUIRE(std::system(("mkdir -p " + kDir).c_str()) == 0);

    SUBCASE("usage error is exit 1") {
        CHECK(run("no-such-subcommand") == 1);
        CHECK(run("resample") == 1);  // missing required options
    }
    SUBCASE("data error is exit 2") {
        spill(kDir + "/broken.json", "[{]");
        CHECK(run("validate " + kDir + "/broken.json") == 2);
        spill(kDir + "/invalid.json", R"([{
            "_id": "0000000000000000000000aa",
            "coarse_vehicle_class": 0,
            "first_timestamp": 0.0, "last_timestamp": 0.04,
            "timestamp": [0.0, 0.04],
            "x_position": [0, 1],
            "y_position": [1, 1],
            "starting_x": 0, "ending_x": 1,
            "length": 10, "width": 5, "height": 5,
            "direction": -1, "configuration_id": 0
        }])");
        CHECK(run("validate " + kDir + "/invalid.json") == 2);
    }
    SUBCASE("resample and validate round trip on the shipped sample") {
        const std::string sample = std::string(TRAJLAB_DATA_DIR) + "/sample_trajectory.json";
        REQUIRE(run("validate " + sample) == 0);
        REQUIRE(run("resample " + sample + " --rate 25 -o " + kDir + "/resampled.json") ==
                0);
        REQUIRE(run("validate " + kDir + "/resampled.json") == 0);
    }
    SUBCASE("convert round trips through a geometry file") {
        spill(kDir + "/geometry.json", R"({
            "control_points": [[0,0],[400,4],[800,12],[1200,24],[1600,40],[2000,60],
                               [2400,84],[2800,112],[3200,144],[3600,180],[4000,220]],
            "anchor": {"index": 0, "x_road": 0.0},
            "eastbound_left": true
        })");
        spill(kDir + "/minimal.json", R"([{
            "_id": "0000000000000000000000ab",
            "coarse_vehicle_class": 0,
            "first_timestamp": 0.0, "last_timestamp": 0.08,
            "timestamp": [0.0, 0.04, 0.08],
            "x_position": [1000.0, 1004.0, 1008.0],
            "y_position": [18.0, 18.0, 18.0],
            "starting_x": 1000.0, "ending_x": 1008.0,
            "length": 15, "width": 6, "height": 5,
            "direction": 1, "configuration_id": 0
        }])");
        REQUIRE(run("convert " + kDir + "/minimal.json --geometry " + kDir +
                    "/geometry.json --to stateplane -o " + kDir + "/stateplane.json") == 0);
        const nlohmann::json sp = nlohmann::json::parse(slurp(kDir + "/stateplane.json"));
        REQUIRE(sp.size() == 1);
        REQUIRE(run("convert " + kDir + "/stateplane.json --geometry " + kDir +
                    "/geometry.json --to roadway -o " + kDir + "/roadway.json") == 0);
        const nlohmann::json rw = nlohmann::json::parse(slurp(kDir + "/roadway.json"));
        const double x0 = rw[0]["x_position"][0].get<double>();
        const double y0 = rw[0]["y_position"][0].get<double>();
        CHECK(std::abs(x0 - 1000.0) < 1e-3);
        CHECK(std::abs(y0 - 18.0) < 1e-3);
    }
    SUBCASE("calibrate fits a homography from a correspondence file") {
        // four point pairs define an exact perspective transform
        spill(kDir + "/correspondences.json", R"({
            "correspondence_points": [
                {"image": [100, 800], "state_plane": [0, 0, 0]},
                {"image": [1800, 820], "state_plane": [100, 0, 0]},
                {"image": [300, 400], "state_plane": [0, 60, 0]},
                {"image": [1500, 420], "state_plane": [100, 60, 0]}
            ]
        })");
        REQUIRE(run("calibrate --correspondences " + kDir +
                    "/correspondences.json -o " + kDir + "/calibration.json") == 0);
        const nlohmann::json calib =
            nlohmann::json::parse(slurp(kDir + "/calibration.json"));
        CHECK(calib.contains("H"));
        CHECK(calib["h_residual_ft"].get<double>() < 1e-6);
    }
}
