#!/usr/bin/env python3
"""Regenerates the small procedural images under assets/."""

import math
import pathlib

from PIL import Image, ImageDraw

ASSETS = pathlib.Path(__file__).resolve().parent.parent / "assets"


def toy_content(size=64):
    img = Image.new("RGB", (size, size))
    px = img.load()
    for y in range(size):
        for x in range(size):
            t = y / (size - 1)
            px[x, y] = (int(90 + 100 * t), int(150 + 60 * t), int(230 - 60 * t))
    d = ImageDraw.Draw(img)
    d.rectangle([0, 44, size - 1, size - 1], fill=(70, 140, 60))
    d.ellipse([38, 6, 56, 24], fill=(250, 220, 80))
    d.rectangle([10, 28, 30, 50], fill=(180, 60, 50))
    d.polygon([(7, 29), (20, 16), (33, 29)], fill=(110, 40, 30))
    d.rectangle([17, 38, 23, 50], fill=(60, 40, 30))
    return img


def toy_style(size=64):
    img = Image.new("RGB", (size, size))
    px = img.load()
    for y in range(size):
        for x in range(size):
            u = math.sin(0.45 * x + 0.8 * math.sin(0.2 * y))
            v = math.cos(0.35 * y - 0.6 * math.sin(0.25 * x))
            r = 0.5 + 0.5 * u
            g = 0.5 + 0.5 * u * v
            b = 0.5 + 0.5 * v
            px[x, y] = (int(40 + 200 * r), int(20 + 120 * g), int(60 + 180 * b))
    d = ImageDraw.Draw(img)
    for k in range(0, size, 16):
        d.line([(k, 0), (k + 20, size - 1)], fill=(20, 20, 40), width=2)
    return img


def test_image(size=16):
    img = Image.new("RGB", (size, size))
    px = img.load()
    for y in range(size):
        for x in range(size):
            px[x, y] = ((x * 16) % 256, (y * 16) % 256, ((x + y) * 8) % 256)
    return img


def flat_jpeg(size=16):
    return Image.new("RGB", (size, size), (128, 64, 200))


def gray_jpeg(size=16):
    return Image.new("L", (size, size), 90)


def label_mask(width=6, height=4):
    img = Image.new("L", (width, height))
    px = img.load()
    for y in range(height):
        for x in range(width):
            px[x, y] = (x + 2 * y) % 3
    return img


def main():
    ASSETS.mkdir(exist_ok=True)
    toy_content().save(ASSETS / "toy_content.png")
    toy_style().save(ASSETS / "toy_style.png")
    test_image().save(ASSETS / "test16.png")
    flat_jpeg().save(ASSETS / "flat16.jpg", quality=100)
    gray_jpeg().save(ASSETS / "gray16.jpg", quality=100)
    label_mask().save(ASSETS / "labels6x4.png")


if __name__ == "__main__":
    main()
