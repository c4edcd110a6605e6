"""
Scenario-driven verification harness and command line interface.
"""
from .report import *
from .scenario import *
from .suites import *
