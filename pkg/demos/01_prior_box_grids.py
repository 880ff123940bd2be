"""Walk through the detector's multi-scale grids and prior-box counts.

Each detection layer tiles the (square) input image with a grid of cells
and places a few candidate boxes per cell. Coarser grids look for bigger
objects. Summing every layer's cells times boxes-per-cell gives the
model's fixed budget of candidate detections per class.
"""

from cctrack import default_layer_specs, generate_prior_centers, prior_box_count

specs = default_layer_specs()

print("layer        grid    boxes/cell  priors")
for spec in specs:
    print(f"{spec.name:<12} {spec.grid_w:>2}x{spec.grid_h:<4} {spec.boxes_per_cell:>7}     {spec.num_priors:>6}")
print(f"{'total':<12} {'':<12} {prior_box_count(specs):>13}")

# The finest grid dominates the budget:
conv4_3 = specs[0]
share = conv4_3.num_priors / prior_box_count(specs)
print(f"\n{conv4_3.name} alone contributes {share:.1%} of all prior boxes.")

# Centers are cell midpoints in normalized image coordinates, row-major:
coarse = specs[-2]  # the 3x3 layer
print(f"\n{coarse.name} cell centers (x, y), x varying fastest:")
for point in generate_prior_centers(coarse):
    print(f"  ({point.x:.4f}, {point.y:.4f})")
