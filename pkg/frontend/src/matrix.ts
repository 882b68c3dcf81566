/** Cohort transition heatmap with per-cell drill-down. */

import type { MatrixResponse, TransitionsResponse } from "./api.js";
import { drillDown, formatPercent, heatColor, matrixCells } from "./viewmodel.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderMatrix(
  container: HTMLElement,
  matrix: MatrixResponse,
  transitions: TransitionsResponse,
): void {
  const panel = el("section", "panel");
  panel.appendChild(
    el("h2", undefined, `Stage transitions ${matrix.from_edition} → ${matrix.to_edition}`),
  );

  const table = el("table", "heatmap");
  const head = el("tr");
  head.appendChild(el("th", "corner", "from \\ to"));
  for (const code of matrix.stage_order) {
    head.appendChild(el("th", undefined, code));
  }
  table.appendChild(head);

  const drill = el("div", "drilldown");
  drill.appendChild(el("p", "hint", "Click a cell to list the patients counted there."));

  for (const row of matrixCells(matrix)) {
    const tr = el("tr", row[0].rowDefined ? undefined : "undefined-row");
    tr.appendChild(el("th", undefined, row[0].from));
    for (const cell of row) {
      const td = el("td", "cell", cell.rowDefined ? formatPercent(cell.percent) : "–");
      td.style.background = heatColor(cell.percent);
      td.title = cell.rowDefined
        ? `${cell.from} → ${cell.to}: ${cell.count} patient(s), ${formatPercent(cell.percent)}`
        : `${cell.from}: no patients staged here`;
      td.addEventListener("click", () => {
        const patients = drillDown(transitions, cell.from, cell.to);
        drill.replaceChildren(
          el(
            "h3",
            undefined,
            `${cell.from} → ${cell.to}: ${patients.length} patient(s)`,
          ),
          patients.length
            ? (() => {
                const list = el("ul", "drill-list");
                for (const patient of patients) {
                  list.appendChild(el("li", undefined, patient));
                }
                return list;
              })()
            : el("p", "empty", "No patients in this cell."),
        );
      });
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  panel.appendChild(table);

  const legend = el("p", "legend");
  legend.appendChild(el("span", "legend-swatch"));
  legend.appendChild(
    document.createTextNode(
      ` row percentage (darker = larger share); – marks rows with no patients, which is not the same as 0%. Unstaged/excluded: ${matrix.unstaged}.`,
    ),
  );
  panel.appendChild(legend);

  if (matrix.exclusions.length) {
    const details = el("details", "exclusions");
    details.appendChild(el("summary", undefined, `Excluded patients (${matrix.exclusions.length})`));
    const list = el("ul");
    for (const exclusion of matrix.exclusions) {
      list.appendChild(el("li", undefined, `${exclusion.patient}: ${exclusion.reason}`));
    }
    details.appendChild(list);
    panel.appendChild(details);
  }

  container.replaceChildren(panel, drill);
}
