from src.services.encoder import EncodedNetwork, encode, export_network
from src.services.witness import WitnessError, build_witness
from src.services.explorer import SearchBudget, bounded_reach
from src.services.http import HTTPServer

__all__ = [
    'EncodedNetwork', 'HTTPServer', 'SearchBudget', 'WitnessError',
    'bounded_reach', 'build_witness', 'encode', 'export_network',
]
