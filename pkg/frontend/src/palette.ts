/** Renders the fixed operation palette of the current view.

One button per operation; read-only views (analysis) get an explanatory
placeholder instead.  Argument collection is the caller's concern: the
click handler receives the palette item, schema included.
*/

import type { PaletteItem } from "./protocol.js";

export type PaletteAction = (item: PaletteItem) => void;

export function renderPalette(
  items: PaletteItem[],
  container: Element,
  onAction: PaletteAction,
): void {
  container.replaceChildren();
  if (!items.length) {
    const note = document.createElement("p");
    note.className = "palette-empty";
    note.textContent = "read-only view";
    container.appendChild(note);
    return;
  }
  for (const item of items) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "palette-item";
    button.dataset.operation = item.operation;
    button.textContent = item.label;
    button.addEventListener("click", () => onAction(item));
    container.appendChild(button);
  }
}
