/** Symptom list attachment: ordered items straight from the API payload. */

import { el } from './dom.js';
import type { SymptomListAttachment } from '../types.js';

export function createSymptomList(data: SymptomListAttachment): HTMLOListElement {
  const list = el('ol', 'symptom-list');
  for (const item of data.items) {
    const row = el('li', 'symptom-item');
    row.appendChild(el('span', 'symptom-name', item.name));
    row.appendChild(el('span', 'symptom-prevalence', `${item.prevalence_percent}%`));
    if (item.synonyms.length) {
      row.appendChild(el('span', 'symptom-synonyms', item.synonyms.join(', ')));
    }
    list.appendChild(row);
  }
  return list;
}
