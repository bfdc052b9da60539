import os
import json

from convinse.library.utils import store_json_with_mkdir, get_logger


class HeterogeneousAnswering:
    def __init__(self, config):
        """Initialize HA module."""
        self.config = config
        self.logger = get_logger(__name__, config)

    def train(self, sources=["kb", "text", "table", "info"]):
        """ Method used in case no training required for HA phase. """
        self.logger.info(f"No need to train.")
        pass
