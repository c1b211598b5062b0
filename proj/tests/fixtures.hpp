#pragma once

// Shared hand-enumerated fixtures.

#include <string>
#include <vector>

#include "netreport/population.hpp"

namespace netreport::testing {

// Six nodes, edges 0-1, 1-2, 2-3, 3-4, 1-4, 2-5; frame {1,2}; hidden {0..4}.
// Hand enumeration: every hidden node has exactly one frame neighbor, so the
// mean frame degree is 1 from both the hidden and the frame side, and a
// census interview of the frame yields records (d=3,o=3,f=1) for node 1 and
// (d=3,o=2,f=1) for node 2.
inline Population six_node_population() {
  UndirectedNetwork net(6);
  net.add_edge(0, 1);
  net.add_edge(1, 2);
  net.add_edge(2, 3);
  net.add_edge(3, 4);
  net.add_edge(1, 4);
  net.add_edge(2, 5);
  net.finalize();
  std::vector<bool> in_frame = {false, true, true, false, false, false};
  std::vector<bool> in_hidden = {true, true, true, true, true, false};
  std::vector<std::string> groups = {"g1", "g1", "g2", "g2", "g1", "g2"};
  return Population(std::move(in_frame), std::move(in_hidden),
                    std::move(groups), std::move(net));
}

}  // namespace netreport::testing
