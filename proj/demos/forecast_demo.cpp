// Ranks a random-graph ensemble on a price panel and prints 12-month
// forecasts of the headline rate from the top graphs next to AvAR.
//
//   forecast_demo [prices.csv [target_id]]
//
// Defaults to the bundled synthetic fixture.
#include <iomanip>
#include <iostream>

#include "ragnar/ragnar.hpp"

#ifndef RAGNAR_FIXTURE_DIR
#define RAGNAR_FIXTURE_DIR "data/fixture"
#endif

using namespace ragnar;

int main(int argc, char** argv) {
  PanelSchema schema;
  schema.target_id = argc > 2 ? argv[2] : "S00";
  const std::string path = argc > 1 ? argv[1] : std::string(RAGNAR_FIXTURE_DIR) + "/cpi_fixture.csv";
  try {
    const RatePanel rates = yoy_transform(load_panel(path, schema));
    const Panel panel = complete_series(rates, rates.dates.front());
    const int n_train = 60, n_val = 12, top_n = 5, horizon = 12;
    const YearMonth origin = panel.dates.back();
    std::cout << panel.n_series() << " series, " << panel.dates.front().str() << " to " << origin.str() << "\n";

    const auto graphs = generate_ensemble(panel.n_series(), 0.15, 7, 200);
    const ModelMembers members = member_grid({2, 3, 6}, {1, 2});
    RankingEngine engine(panel, graphs, n_train, n_val);
    const RankingTable ranking = engine.rank(members, origin, panel.target);
    const auto top = ranking.top(top_n);
    std::cout << "top graphs by one-step RMSE:";
    for (int id : top) std::cout << ' ' << id << " (" << std::setprecision(3) << ranking.rmse[id] << ')';
    std::cout << '\n';

    const auto per_graph =
        ragnar_forecast(panel, graphs, top, members, ParamClass::local_alpha_beta, origin, n_train, horizon);
    const Eigen::VectorXd network = average_top(per_graph, top_n).values.col(panel.target);
    const Eigen::VectorXd history = window(panel, origin, n_train, false).values.col(panel.target);
    const Eigen::VectorXd avar = avar_forecast(history, {2, 3, 6}, horizon);

    std::cout << "\nmonth     AvGNAR   AvAR\n" << std::fixed << std::setprecision(3);
    for (int h = 0; h < horizon; ++h)
      std::cout << (origin + (h + 1)).str() << "  " << std::setw(6) << network(h) << "  " << std::setw(6) << avar(h)
                << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
