"""idforge: simulated bona fide ID-document synthesis and PAD evaluation.

Library layout:

- layout: declarative card templates (JSON), builtin Chilean layouts
- persona: synthetic identities, RUN/MRZ check digits, prompt builders
- imaging: raster primitives (matting, resize, rotation, compositing, text)
- qualitygate: OFIQ-style report filtering
- compose: template + assets -> finished documents, batches, manifests
- padmetrics: APCER/BPCER/EER/DET over classifier scores
- embedstats: FID and exact t-SNE over embedding sets
- cli: the `idforge` executable
"""

__version__ = "0.1.0"
