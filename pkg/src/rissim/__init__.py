"""Link-level simulation and semi-analytical BER analysis of RIS-assisted MIMO and SM links."""

__version__ = "0.1.0"
