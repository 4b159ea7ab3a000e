"""
NOMA Access Sim
Clustered NOMA uplink random access with a policy-gradient base station agent
"""

__version__ = "1.0.0"
