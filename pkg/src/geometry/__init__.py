"""
Polygon geometry: boundary data, relabeling, reconstruction and sample shapes
"""
