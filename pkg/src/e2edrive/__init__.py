"""2D urban imitation-learning driving stack.

Subsystems: a deterministic 2D simulator with traffic lights and NPC
traffic (`simworld`), a camera renderer (`render`), a rule-based expert
autopilot with noise injection (`expert`), a dataset preparation
pipeline (`datapipe`), from-scratch CNN / CNN-LSTM training (`neural`),
a closed-loop evaluation harness (`evalharness`), and a CLI plus
websocket gateway (`cli`, `gateway`).
"""

__version__ = "0.1.0"
