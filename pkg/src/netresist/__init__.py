"""Structure entropy, resistance and security index of graphs."""

from .codingtree import CodingTree, ModuleFunction, hK_exact, hK_greedy, hT, hT_with_module_function, validate_tree
from .entropy import EntropyReport, decompose_hP, h1, hP, is_resistor_graph, resistance_of_partition, security_index
from .errors import CapacityError, DomainError, InputError, NetResistError, ParseError, RetryableError
from .graph import Graph, Partition, conductance, cut_weight, degree, graph_conductance, volume
from .partition_search import exact_h2, greedy_h2, merge_delta, merge_split_criterion, resistance

__version__ = "0.1.0"
