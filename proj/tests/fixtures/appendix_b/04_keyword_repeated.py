import unittest
from datetime import datetime, timezone

from dateutil.relativedelta import relativedelta

from bot.utils import time


class TimeTests(unittest.TestCase):
    """Test helper functions in bot.utils.time."""

    def test_humanize_delta_handle_unknown_units(self):
        """humanize_delta should be able to handle unknown units, and will not abort."""
        self.assertEqual(
            time.humanize_delta(datetime.utcnow(), datetime.utcnow() - relativedelta(months=1, months=2)),
            "1 month and 2 months"
        )
