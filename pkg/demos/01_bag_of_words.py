# %% [markdown]
# # Bag-of-words histograms
#
# Generate a small grating corpus, cut every image into dense 8x8 patches,
# learn a visual codebook with k-means and turn each image into a
# normalised histogram of visual words.

# %%
import tempfile

import numpy as np

from histretrieval import (extract_patches, generate_synthetic_corpus,
                           quantize_image, scan_dataset, train_codebook)

root = tempfile.mkdtemp()
generate_synthetic_corpus(root, classes=4, per_class=5, image_size=64,
                          noise_sigma=0.05, seed=0)
dataset = scan_dataset(root)
print(len(dataset), "images in classes", dataset.classes)

# %%
patches = [extract_patches(r, patch_size=8, stride=4) for r in dataset.records]
print("patches per image:", patches[0].shape)

# %%
codebook = train_codebook(np.vstack(patches), K=32, seed=0)
print("k-means iterations:", codebook.n_iter)
print("objective trace:", np.round(codebook.objective[:5], 1), "...")

# %%
H = np.array([quantize_image(p, codebook) for p in patches])
for label, h in zip(dataset.labels, H):
    top = np.argsort(-h)[:3]
    print(dataset.classes[label], "dominant words", top.tolist())
